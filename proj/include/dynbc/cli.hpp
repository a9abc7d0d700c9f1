#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dynbc::cli {

enum ExitCode : int {
    ok = 0,
    input_error = 1,
    violated = 2,   // certify: a condition failed; verify: a slack below -tol
    blowup = 3,     // solve
    step_failure = 4,  // solve
};

struct Manifest {
    std::string command;  // certify | solve | verify | sweep
    std::filesystem::path spec;
    std::filesystem::path out = ".";
    std::string format = "json";  // json | csv
    bool strict = false;
    unsigned jobs = 1;
    std::optional<int> nx;
    std::optional<double> dt0;
    std::optional<double> cutoff;
};

int cmd_certify(const Manifest& m);
int cmd_solve(const Manifest& m);
int cmd_verify(const Manifest& m);
int cmd_sweep(const Manifest& m);

// Parses the command line and dispatches; never throws.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // without the program name

}  // namespace dynbc::cli
