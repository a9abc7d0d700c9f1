#include "dynbc/cli.hpp"

int main(int argc, char** argv) { return dynbc::cli::run(argc, argv); }
