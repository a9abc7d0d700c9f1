#include "dynbc/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dynbc/errors.hpp"

namespace dynbc {

namespace fs = std::filesystem;

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw InputError(where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw InputError("unknown key \"" + k + "\" in " + where);
    }
}

Expr expr_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    try {
        if (v.is_number()) return Expr::constant(v.get<double>());
        if (v.is_string()) return parse(v.get<std::string>());
    } catch (const SyntaxError& e) {
        throw InputError(where + "." + key + ": " + e.what());
    } catch (const DomainError& e) {
        throw InputError(where + "." + key + ": " + e.what());
    }
    throw InputError(where + "." + key + " must be an expression string or a number");
}

std::optional<Expr> opt_expr(const nlohmann::json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return expr_field(j, key, where);
}

double num_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw InputError(where + "." + key + " must be a number");
    return v.get<double>();
}

template <class T>
void read_opt(const nlohmann::json& j, const std::string& key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw InputError(where + "." + key + " must be a boolean");
    } else {
        if (!v.is_number()) throw InputError(where + "." + key + " must be a number");
    }
    out = v.get<T>();
}

BoundaryCondition bc_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind")) throw InputError(where + " needs a \"kind\"");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "dynamic") {
        check_keys(j, {"kind", "b", "g", "g1"}, where);
        DynamicBC bc{j.contains("b") ? expr_field(j, "b", where) : Expr::constant(1.0),
                     j.contains("g") ? expr_field(j, "g", where) : Expr::constant(0.0),
                     opt_expr(j, "g1", where)};
        return bc;
    }
    if (kind == "dirichlet") {
        check_keys(j, {"kind", "value"}, where);
        return DirichletBC{j.contains("value") ? expr_field(j, "value", where) : Expr::constant(0.0)};
    }
    throw InputError(where + ".kind must be \"dynamic\" or \"dirichlet\", got \"" + kind + "\"");
}

Json witness_json(const std::vector<std::pair<std::string, double>>& w) {
    Json o = Json::object();
    for (const auto& [k, v] : w) o[k] = v;
    return o;
}

Json witness_json(const Witness& w, bool pair) {
    Json o = Json::object();
    o["t"] = w.t;
    o["x"] = w.x;
    if (pair) o["y"] = w.y;
    return o;
}

void dump_into(const Json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in + Json(k).dump() + ": ";
                dump_into(v, out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                dump_into(v, out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case Json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) throw InputError("bad number \"" + s + "\" in " + where);
    return v;
}

}  // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    if (v == 0.0) return std::signbit(v) ? "-0.0" : "0.0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // Keep it a JSON float so readers do not see an integer.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

RunSpec run_spec_from_json(const nlohmann::json& j) {
    check_keys(j, {"name", "description", "ell", "T", "a", "f", "f1", "u0", "exact", "bc_minus",
                   "bc_plus", "certificate", "solver", "sweep"},
               "spec");
    RunSpec r;
    auto& p = r.problem;
    try {
        if (j.contains("name")) p.name = j.at("name").get<std::string>();
        if (j.contains("ell")) p.ell = num_field(j, "ell", "spec");
        if (j.contains("T")) p.T = num_field(j, "T", "spec");
        if (j.contains("a")) p.a = expr_field(j, "a", "spec");
        if (j.contains("f")) p.f = expr_field(j, "f", "spec");
        p.f1 = opt_expr(j, "f1", "spec");
        if (j.contains("u0")) p.u0 = expr_field(j, "u0", "spec");
        p.exact = opt_expr(j, "exact", "spec");
        if (j.contains("bc_minus")) p.bc_minus = bc_from_json(j.at("bc_minus"), "bc_minus");
        if (j.contains("bc_plus")) p.bc_plus = bc_from_json(j.at("bc_plus"), "bc_plus");

        if (j.contains("certificate")) {
            const auto& c = j.at("certificate");
            check_keys(c, {"psi", "q0", "M", "pmax", "samples", "pair_samples", "Phi", "B", "zmax"},
                       "certificate");
            auto& cc = r.certificate;
            cc.psi = opt_expr(c, "psi", "certificate");
            if (c.contains("q0")) cc.q0 = num_field(c, "q0", "certificate");
            if (c.contains("M")) {
                if (c.at("M").is_string() && c.at("M").get<std::string>() == "auto") {
                    cc.M_auto = true;
                } else {
                    cc.M = num_field(c, "M", "certificate");
                }
            }
            read_opt(c, "pmax", cc.pmax, "certificate");
            read_opt(c, "samples", cc.samples, "certificate");
            read_opt(c, "pair_samples", cc.pair_samples, "certificate");
            cc.Phi = opt_expr(c, "Phi", "certificate");
            if (c.contains("B")) cc.B = num_field(c, "B", "certificate");
            read_opt(c, "zmax", cc.zmax, "certificate");
            if (cc.samples < 2 || cc.pair_samples < 2) throw InputError("sample counts must be >= 2");
        }
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            check_keys(s, {"nx", "dt0", "theta", "newton_tol", "newton_max_iter", "dt_min", "dt_max",
                           "cutoff", "local_error_tol", "strict", "compat_tol", "max_steps", "adaptive"},
                       "solver");
            auto& sc = r.solver;
            read_opt(s, "nx", sc.nx, "solver");
            read_opt(s, "dt0", sc.dt0, "solver");
            read_opt(s, "theta", sc.theta, "solver");
            read_opt(s, "newton_tol", sc.newton_tol, "solver");
            read_opt(s, "newton_max_iter", sc.newton_max_iter, "solver");
            read_opt(s, "dt_min", sc.dt_min, "solver");
            read_opt(s, "dt_max", sc.dt_max, "solver");
            read_opt(s, "cutoff", sc.gradient_cutoff, "solver");
            read_opt(s, "local_error_tol", sc.local_error_tol, "solver");
            read_opt(s, "strict", sc.strict_compatibility, "solver");
            read_opt(s, "compat_tol", sc.compat_tol, "solver");
            read_opt(s, "max_steps", sc.max_steps, "solver");
            read_opt(s, "adaptive", sc.adaptive, "solver");
        }
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            check_keys(s, {"q0", "M", "psi"}, "sweep");
            if (s.contains("q0")) r.sweep.q0 = s.at("q0").get<std::vector<double>>();
            if (s.contains("M")) r.sweep.M = s.at("M").get<std::vector<double>>();
            if (s.contains("psi")) r.sweep.psi = s.at("psi").get<std::vector<std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed spec: ") + e.what());
    }
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw InputError(e.what());
    }
    return r;
}

RunSpec load_run_spec(const fs::path& path) {
    return run_spec_from_json(read_json_file(path));
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string dump_json(const Json& j) {
    std::string out;
    dump_into(j, out, 0);
    out += '\n';
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("write failed for " + path.string());
}

Json to_json(const ConditionReport& r) {
    Json arr = Json::array();
    for (const auto& e : r.entries) {
        Json o;
        o["name"] = e.name;
        o["satisfied"] = e.satisfied;
        o["worst_violation"] = e.worst_violation;
        o["witness"] = witness_json(e.witness);
        if (!e.note.empty()) o["note"] = e.note;
        arr.push_back(std::move(o));
    }
    return arr;
}

Json to_json(const SupBoundCertificate& s) {
    Json o;
    o["Phi"] = s.Phi.str();
    o["B"] = s.B;
    o["u0_sup"] = s.u0_sup;
    o["T"] = s.T;
    o["M_paper"] = s.M_paper;
    o["M_proof"] = s.M_proof;
    o["lambda_star"] = s.lambda_star;
    o["lambda_star_paper"] = s.lambda_star_paper;
    return o;
}

Json to_json(const VerificationReport& r) {
    Json o;
    o["kind"] = "bounds";
    o["passed"] = r.passed();
    o["tolerance"] = r.tolerance;
    o["dx"] = r.dx;
    o["dt"] = r.dt;
    o["q1"] = r.q1;
    o["kappa0"] = r.kappa0;
    o["max_w_tilde"] = r.doubling.max_w_tilde;
    o["w_tilde_witness"] = witness_json(r.doubling.w_witness, true);
    o["max_w1_tilde"] = r.doubling.max_w1_tilde;
    o["w1_tilde_witness"] = witness_json(r.doubling.w1_witness, true);
    o["diagonal_max"] = r.doubling.diagonal_max;
    o["gradient_slack"] = r.gradient_slack;
    o["gradient_witness"] = witness_json(r.gradient_witness, false);
    o["modulus_slack"] = r.doubling.modulus_slack;
    o["modulus_witness"] = witness_json(r.doubling.modulus_witness, true);
    o["sup_u"] = r.sup_u;
    o["sup_witness"] = witness_json(r.sup_witness, false);
    o["sup_slack"] = r.sup_slack ? Json(*r.sup_slack) : Json(nullptr);
    o["sup_slack_paper"] = r.sup_slack_paper ? Json(*r.sup_slack_paper) : Json(nullptr);
    o["covers_corner"] = r.doubling.covers_corner;
    o["max_offset"] = r.doubling.max_offset;
    o["slices_scanned"] = r.doubling.slices_scanned;
    o["pairs_per_slice"] = r.doubling.pairs_per_slice;
    return o;
}

Json to_json(const BlowupCheck& b) {
    Json o;
    o["kind"] = "blowup";
    o["lhs"] = b.lhs;
    o["rhs"] = b.rhs;
    o["consistent"] = b.consistent;
    o["detection_time"] = b.detection_time;
    o["max_gradient"] = b.max_gradient;
    return o;
}

Json to_json(const StepLog& l) {
    Json o;
    o["accepted"] = l.accepted;
    o["rejected"] = l.rejected;
    o["newton_failures"] = l.newton_failures;
    o["theta_fallbacks"] = l.theta_fallbacks;
    return o;
}

Json barrier_to_json(const BarrierCertificate& c) {
    Json o;
    o["psi"] = c.psi;
    o["q0"] = c.q0;
    o["q1"] = c.q1;
    o["kappa0"] = c.kappa0;
    o["kappa0_ode"] = c.kappa0_ode;
    o["M"] = c.M;
    o["K"] = c.K;
    o["M1"] = c.gradient_bound();
    o["h_end"] = c.h_end();
    o["table_rows"] = c.xi.size();
    return o;
}

void write_h_table(const fs::path& path, const BarrierCertificate& c) {
    std::string s = "xi,h,dh\n";
    s.reserve(c.xi.size() * 64);
    for (std::size_t i = 0; i < c.xi.size(); ++i) {
        s += format_double(c.xi[i]) + "," + format_double(c.h[i]) + "," + format_double(c.dh[i]) + "\n";
    }
    write_text(path, s);
}

BarrierCertificate barrier_from_files(const Json& j, const fs::path& table) {
    BarrierCertificate c;
    try {
        const auto& b = j.at("barrier");
        if (b.is_null()) throw InputError("certificate has no barrier");
        c.psi = b.at("psi").get<std::string>();
        c.q0 = b.at("q0").get<double>();
        c.q1 = b.at("q1").get<double>();
        c.kappa0 = b.at("kappa0").get<double>();
        c.kappa0_ode = b.at("kappa0_ode").get<double>();
        c.M = b.at("M").get<double>();
        c.K = b.at("K").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed certificate.json: ") + e.what());
    }
    std::ifstream in(table);
    if (!in) throw InputError("cannot open " + table.string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) throw InputError("h_table.csv rows need 3 fields");
        c.xi.push_back(parse_double(f[0], "h_table.csv"));
        c.h.push_back(parse_double(f[1], "h_table.csv"));
        c.dh.push_back(parse_double(f[2], "h_table.csv"));
    }
    if (c.xi.size() < 2) throw InputError("h_table.csv has fewer than 2 rows");
    return c;
}

void write_solution_csv(const fs::path& path, const Solution& sol) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "t,x,u,u_x,u_t\n";
    const auto& t = sol.u.times();
    const auto& x = sol.u.nodes();
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            out << format_double(t[i]) << ',' << format_double(x[j]) << ',' << format_double(sol.u(i, j))
                << ',' << format_double(sol.ux(i, j)) << ',' << format_double(sol.ut(i, j)) << '\n';
        }
    }
    if (!out) throw InputError("write failed for " + path.string());
}

SolveStatus status_from_string(const std::string& s) {
    if (s == "Completed") return SolveStatus::completed;
    if (s == "BlowUpDetected") return SolveStatus::blowup_detected;
    if (s == "StepFailure") return SolveStatus::step_failure;
    throw InputError("unknown status \"" + s + "\"");
}

Solution read_solution(const fs::path& csv, const Json& summary) {
    std::ifstream in(csv);
    if (!in) throw InputError("cannot open " + csv.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("t,x,u,u_x,u_t", 0) != 0) throw InputError(csv.string() + ": unexpected header");
    std::vector<double> times;
    std::vector<double> nodes;
    std::vector<double> u;
    std::vector<double> ux;
    std::vector<double> ut;
    bool first_level = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw InputError(csv.string() + ": rows need 5 fields");
        const double t = parse_double(f[0], csv.string());
        const double x = parse_double(f[1], csv.string());
        if (times.empty() || t != times.back()) {
            if (!times.empty()) first_level = false;
            times.push_back(t);
        }
        if (first_level) nodes.push_back(x);
        u.push_back(parse_double(f[2], csv.string()));
        ux.push_back(parse_double(f[3], csv.string()));
        ut.push_back(parse_double(f[4], csv.string()));
    }
    Solution sol;
    try {
        sol.u = GridFunction(times, nodes, std::move(u));
        sol.ux = GridFunction(times, nodes, std::move(ux));
        sol.ut = GridFunction(times, nodes, std::move(ut));
    } catch (const InvalidGrid& e) {
        throw InputError(csv.string() + ": " + e.what());
    }
    try {
        sol.status = status_from_string(summary.at("status").get<std::string>());
        sol.status_time = summary.at("status_time").get<double>();
        sol.max_gradient = summary.at("max_gradient").get<double>();
        if (summary.contains("reason")) sol.reason = summary.at("reason").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed summary.json: ") + e.what());
    }
    return sol;
}

}  // namespace dynbc
