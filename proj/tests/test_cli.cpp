#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dynbc/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kPresets = DYNBC_PRESET_DIR;

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("dynbc_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run(std::vector<std::string> args) { return dynbc::cli::run(args); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

std::string preset(const char* name) { return (kPresets / (std::string(name) + ".json")).string(); }

}  // namespace

TEST_CASE("steady chain") {
    const auto d = fresh_dir("steady");
    CHECK(run({"certify", "--spec", preset("steady"), "--out", d.string()}) == 0);
    CHECK(run({"solve", "--spec", preset("steady"), "--out", d.string()}) == 0);
    const auto s = load(d / "summary.json");
    CHECK(s["status"] == "Completed");
    CHECK(s["exact_error"].get<double>() <= 1e-10);
    CHECK(run({"verify", "--spec", preset("steady"), "--out", d.string()}) == 0);
    const auto v = load(d / "verification.json");
    CHECK(v["passed"] == true);
    CHECK(fs::exists(d / "witnesses.csv"));
    CHECK(fs::exists(d / "h_table.csv"));
    CHECK(fs::exists(d / "solution.csv"));
}

TEST_CASE("manufactured chain") {
    const auto d = fresh_dir("manufactured");
    CHECK(run({"certify", "--spec", preset("manufactured"), "--out", d.string()}) == 0);
    CHECK(run({"solve", "--spec", preset("manufactured"), "--out", d.string()}) == 0);
    CHECK(load(d / "summary.json")["exact_error"].get<double>() <= 5e-5);
    CHECK(run({"verify", "--spec", preset("manufactured"), "--out", d.string()}) == 0);
    CHECK(load(d / "verification.json")["max_w_tilde"].get<double>() <= 1e-6);

    // Coarser grid through the command-line override: error grows by about 4.
    const auto c = fresh_dir("manufactured_coarse");
    CHECK(run({"solve", "--spec", preset("manufactured"), "--out", c.string(), "--nx", "65"}) == 0);
    const double fine = load(d / "summary.json")["exact_error"].get<double>();
    const double coarse = load(c / "summary.json")["exact_error"].get<double>();
    CHECK(std::log2(coarse / fine) >= 1.9);
}

TEST_CASE("reports are byte-identical across runs") {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    for (const auto& d : {a, b}) {
        CHECK(run({"certify", "--spec", preset("burgers"), "--out", d.string()}) == 0);
        CHECK(run({"solve", "--spec", preset("burgers"), "--out", d.string()}) == 0);
        CHECK(run({"verify", "--spec", preset("burgers"), "--out", d.string()}) == 0);
    }
    for (const char* f : {"certificate.json", "summary.json", "verification.json", "solution.csv", "h_table.csv"}) {
        CAPTURE(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("blow-up exit code and verification") {
    const auto d = fresh_dir("blowup");
    CHECK(run({"solve", "--spec", preset("blowup-270"), "--out", d.string()}) == 3);
    const auto s = load(d / "summary.json");
    CHECK(s["status"] == "BlowUpDetected");
    CHECK(s["status_time"].get<double>() > 0.0);
    CHECK(run({"verify", "--spec", preset("blowup-270"), "--out", d.string()}) == 0);
    const auto v = load(d / "verification.json");
    CHECK(v["kind"] == "blowup");
    CHECK(v["consistent"] == true);

    const auto e = fresh_dir("blowup_twin");
    CHECK(run({"solve", "--spec", preset("blowup-270-divergent"), "--out", e.string()}) == 0);
}

TEST_CASE("certify flags a violated condition with exit 2") {
    const auto d = fresh_dir("violating");
    CHECK(run({"certify", "--spec", preset("violating-9bneu"), "--out", d.string(), "--format", "csv"}) == 2);
    const auto c = load(d / "certificate.json");
    CHECK(c["all_satisfied"] == false);
    bool found = false;
    for (const auto& e : c["conditions"]) {
        if (e["name"] == "(9bNEU)") {
            found = true;
            CHECK(e["satisfied"] == false);
            CHECK(e["worst_violation"].get<double>() == doctest::Approx(1.0));
            CHECK(e["witness"]["p"].get<double>() == doctest::Approx(1.0));
        }
    }
    CHECK(found);
    CHECK(fs::exists(d / "conditions.csv"));
}

TEST_CASE("sweep over q0") {
    const auto d = fresh_dir("sweep");
    CHECK(run({"sweep", "--spec", preset("sweep-q0"), "--out", d.string(), "--jobs", "3"}) == 0);
    std::ifstream in(d / "sweep.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("q0,M,psi,status,q1,", 0) == 0);
    std::vector<double> q1;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() >= 5);
        CHECK(cells[3] == "OK");
        q1.push_back(std::stod(cells[4]));
    }
    REQUIRE(q1.size() == 3);
    CHECK(q1[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(q1[1] == doctest::Approx(std::sqrt(12.0)).epsilon(1e-12));
    CHECK(q1[2] == doctest::Approx(std::sqrt(24.0)).epsilon(1e-12));
}

TEST_CASE("sweep records per-point failures") {
    const auto d = fresh_dir("sweep_fail");
    json spec = load(kPresets / "constant-psi.json");
    spec["certificate"]["q0"] = 1e-9;
    spec["sweep"] = {{"psi", {"1", "(1+p^2)^1.5"}}};
    spec["certificate"]["M"] = 1.0;
    std::ofstream(d / "spec.json") << spec.dump();
    CHECK(run({"sweep", "--spec", (d / "spec.json").string(), "--out", d.string()}) == 0);
    const auto text = slurp(d / "sweep.csv");
    CHECK(text.find(",OK,") != std::string::npos);
    CHECK(text.find(",ConditionViolated,") != std::string::npos);
}

TEST_CASE("input errors exit 1") {
    const auto d = fresh_dir("errors");
    CHECK(run({"certify", "--spec", (d / "missing.json").string(), "--out", d.string()}) == 1);
    CHECK(run({"frobnicate"}) == 1);
    CHECK(run({"solve", "--spec", preset("steady"), "--format", "xml"}) == 1);
    CHECK(run({"verify", "--spec", preset("steady"), "--out", d.string()}) == 1);  // no artifacts
    CHECK(run({"sweep", "--spec", preset("steady"), "--out", d.string()}) == 1);   // no axes

    std::ofstream(d / "empty_axis.json") << R"({"u0": "0", "certificate": {"psi": "1", "q0": 1, "M": 2}, "sweep": {"q0": []}})";
    CHECK(run({"sweep", "--spec", (d / "empty_axis.json").string(), "--out", d.string()}) == 1);
    std::ofstream(d / "typo.json") << R"({"u0": "0", "elll": 1})";
    CHECK(run({"solve", "--spec", (d / "typo.json").string(), "--out", d.string()}) == 1);
    std::ofstream(d / "syntax.json") << R"({"u0": "sin(x"})";
    CHECK(run({"solve", "--spec", (d / "syntax.json").string(), "--out", d.string()}) == 1);
}

TEST_CASE("a certificate below the solution's sup norm is a mismatch") {
    const auto d = fresh_dir("mismatch");
    json spec = load(kPresets / "manufactured.json");
    spec["certificate"]["M"] = 0.5;
    std::ofstream(d / "spec.json") << spec.dump();
    const auto sp = (d / "spec.json").string();
    run({"certify", "--spec", sp, "--out", d.string()});
    REQUIRE(run({"solve", "--spec", sp, "--out", d.string()}) == 0);
    CHECK(run({"verify", "--spec", sp, "--out", d.string()}) == 1);
}

TEST_CASE("help and the executable") {
    CHECK(run({"--help"}) == 0);
#ifdef DYNBC_CLI_PATH
    const auto d = fresh_dir("exe");
    const std::string cmd = std::string(DYNBC_CLI_PATH) + " certify --spec " + preset("constant-psi") +
                            " --out " + d.string() + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(load(d / "certificate.json")["barrier"]["q1"].get<double>() == doctest::Approx(3.0));
#endif
}
