#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dynbc/certificate.hpp"
#include "dynbc/problem.hpp"
#include "dynbc/solver.hpp"
#include "dynbc/verify.hpp"

namespace dynbc {

using Json = nlohmann::ordered_json;

// Certificate section of a run file.
struct CertificateConfig {
    std::optional<Expr> psi;
    std::optional<double> q0;
    std::optional<double> M;  // empty with M_auto: taken from the sup bound
    bool M_auto = false;
    double pmax = 0.0;        // <= 0: automatic
    int samples = 33;
    int pair_samples = 9;
    std::optional<Expr> Phi;
    std::optional<double> B;
    double zmax = 100.0;
};

struct SweepAxes {
    std::vector<double> q0;
    std::vector<double> M;
    std::vector<std::string> psi;
    bool empty() const { return q0.empty() && M.empty() && psi.empty(); }
};

struct RunSpec {
    ProblemSpec problem;
    CertificateConfig certificate;
    SolverConfig solver;
    SweepAxes sweep;
};

// Throws InputError for malformed JSON or missing fields; expression errors
// are reported with the offending key.
RunSpec run_spec_from_json(const nlohmann::json& j);
RunSpec load_run_spec(const std::filesystem::path& path);

// Deterministic JSON text: keys in insertion order, two-space indent, finite
// numbers as %.17g, non-finite numbers as null.
std::string dump_json(const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json_file(const std::filesystem::path& path);

std::string format_double(double v);

Json to_json(const ConditionReport& r);
Json to_json(const SupBoundCertificate& s);
Json to_json(const VerificationReport& r);
Json to_json(const BlowupCheck& b);
Json to_json(const StepLog& l);

// certificate.json fields of a barrier; the table goes to h_table.csv.
Json barrier_to_json(const BarrierCertificate& c);
BarrierCertificate barrier_from_files(const Json& certificate_json,
                                      const std::filesystem::path& h_table_csv);
void write_h_table(const std::filesystem::path& path, const BarrierCertificate& c);

// solution.csv: t,x,u,u_x,u_t for every stored level and node.
void write_solution_csv(const std::filesystem::path& path, const Solution& sol);
// Status fields come from the summary written next to it.
Solution read_solution(const std::filesystem::path& solution_csv, const Json& summary);

SolveStatus status_from_string(const std::string& s);

}  // namespace dynbc
