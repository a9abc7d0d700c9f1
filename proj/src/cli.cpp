#include "dynbc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "dynbc/certificate.hpp"
#include "dynbc/errors.hpp"
#include "dynbc/report.hpp"
#include "dynbc/solver.hpp"
#include "dynbc/verify.hpp"

namespace dynbc::cli {

namespace fs = std::filesystem;

namespace {

std::optional<double> env_tolerance() {
    const char* s = std::getenv("DYNBC_TOL");
    if (!s || !*s) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
        throw InputError(std::string("DYNBC_TOL must be a positive number, got \"") + s + "\"");
    }
    return v;
}

RunSpec load(const Manifest& m) {
    if (!fs::exists(m.spec)) throw InputError("spec file not found: " + m.spec.string());
    RunSpec r = load_run_spec(m.spec);
    if (m.nx) r.solver.nx = *m.nx;
    if (m.dt0) r.solver.dt0 = *m.dt0;
    if (m.cutoff) r.solver.gradient_cutoff = *m.cutoff;
    if (m.strict) r.solver.strict_compatibility = true;
    if (const auto tol = env_tolerance()) r.solver.compat_tol = *tol;
    return r;
}

void prepare_out(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
}

double u0_sup(const ProblemSpec& p) {
    const Program u0(p.u0);
    double m = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = -p.ell + 2.0 * p.ell * i / 10000;
        m = std::max(m, std::abs(u0(0.0, x, 0.0, 0.0)));
    }
    return m;
}

std::string witness_text(const std::vector<std::pair<std::string, double>>& w) {
    std::string s;
    for (const auto& [k, v] : w) {
        if (!s.empty()) s += ';';
        s += k + "=" + format_double(v);
    }
    return s;
}

std::string csv_field(std::string s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

PsiSpec require_psi(const CertificateConfig& c) {
    if (!c.psi) throw InputError("certificate.psi is required");
    try {
        return PsiSpec(*c.psi);
    } catch (const ConfigError& e) {
        throw InputError(std::string("certificate.psi: ") + e.what());
    }
}

std::optional<SupBoundCertificate> sup_cert_for(const RunSpec& r, std::string& error) {
    const auto& c = r.certificate;
    if (!c.Phi || !c.B) return std::nullopt;
    try {
        return sup_bound(*c.Phi, *c.B, u0_sup(r.problem), r.problem.T);
    } catch (const ConditionViolated& e) {
        error = e.what();
    } catch (const PreconditionFailed& e) {
        throw InputError(std::string("sup bound: ") + e.what());
    }
    return std::nullopt;
}

double resolve_M(const RunSpec& r, const std::optional<SupBoundCertificate>& sup) {
    const auto& c = r.certificate;
    if (c.M_auto) {
        if (!c.Phi || !c.B) throw InputError("certificate.M = \"auto\" needs Phi and B");
        if (!sup) throw InputError("certificate.M = \"auto\" but the sup bound is unavailable");
        return sup->M_proof;
    }
    if (!c.M) throw InputError("certificate.M is required");
    return *c.M;
}

HypothesisOptions hypothesis_options(const RunSpec& r) {
    HypothesisOptions o;
    o.samples = r.certificate.samples;
    o.pair_samples = r.certificate.pair_samples;
    o.zmax = r.certificate.zmax;
    o.compat_tol = r.solver.compat_tol;
    if (r.certificate.Phi && r.certificate.B) o.growth = GrowthBound{*r.certificate.Phi, *r.certificate.B};
    return o;
}

template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
    } catch (const SyntaxError& e) {
        std::cerr << "syntax error: " << e.what() << '\n';
    } catch (const CertificateMismatch& e) {
        std::cerr << "certificate mismatch: " << e.what() << '\n';
    } catch (const PreconditionFailed& e) {
        std::cerr << "precondition failed: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return input_error;
}

}  // namespace

int cmd_certify(const Manifest& m) {
    return guarded([&] {
        const RunSpec r = load(m);
        const auto& c = r.certificate;
        const PsiSpec psi = require_psi(c);
        if (!c.q0) throw InputError("certificate.q0 is required");
        const double q0 = *c.q0;
        if (!(q0 > 0.0)) throw InputError("certificate.q0 must be positive");
        std::string sup_error;
        const auto sup = sup_cert_for(r, sup_error);
        const double M = resolve_M(r, sup);
        if (!(M > 0.0)) throw InputError("certificate.M must be positive");
        prepare_out(m.out);

        const double K = estimate_lipschitz(r.problem.u0, r.problem.ell);
        std::optional<BarrierCertificate> barrier;
        std::string barrier_error;
        try {
            barrier = build_barrier(psi, q0, M, K);
        } catch (const ConditionViolated& e) {
            barrier_error = e.what();
        } catch (const PreconditionFailed& e) {
            barrier_error = e.what();
        }
        const double pmax = c.pmax > 0.0 ? c.pmax : (barrier ? 4.0 * barrier->q1 : 100.0);
        const auto report = check_hypotheses(r.problem, M, q0, psi, pmax, hypothesis_options(r));

        Json j;
        j["command"] = "certify";
        j["name"] = r.problem.name;
        j["psi"] = psi.expr().str();
        j["q0"] = q0;
        j["M"] = M;
        j["M_source"] = c.M_auto ? "sup_bound" : "given";
        j["K"] = K;
        j["pmax"] = pmax;
        j["barrier"] = barrier ? barrier_to_json(*barrier) : Json(nullptr);
        j["barrier_error"] = barrier ? Json(nullptr) : Json(barrier_error);
        j["sup_bound"] = sup ? to_json(*sup) : Json(nullptr);
        j["sup_bound_error"] = sup_error.empty() ? Json(nullptr) : Json(sup_error);
        j["conditions"] = to_json(report);
        const bool ok = report.all_satisfied() && barrier && sup_error.empty();
        j["all_satisfied"] = ok;
        write_text(m.out / "certificate.json", dump_json(j));
        if (barrier) write_h_table(m.out / "h_table.csv", *barrier);
        if (m.format == "csv") {
            std::string s = "name,satisfied,worst_violation,witness,note\n";
            for (const auto& e : report.entries) {
                s += csv_field(e.name) + "," + (e.satisfied ? "true" : "false") + "," +
                     format_double(e.worst_violation) + "," + csv_field(witness_text(e.witness)) + "," +
                     csv_field(e.note) + "\n";
            }
            write_text(m.out / "conditions.csv", s);
        }

        if (barrier) {
            std::cout << "q1 = " << format_double(barrier->q1) << ", kappa0 = "
                      << format_double(barrier->kappa0) << '\n';
        } else {
            std::cout << "no barrier: " << barrier_error << '\n';
        }
        for (const auto& e : report.entries) {
            if (!e.satisfied) {
                std::cout << "violated " << e.name << " margin " << format_double(e.worst_violation)
                          << " at " << witness_text(e.witness) << '\n';
            }
        }
        if (!sup_error.empty()) std::cout << "sup bound: " << sup_error << '\n';
        return ok ? static_cast<int>(ExitCode::ok) : static_cast<int>(violated);
    });
}

int cmd_solve(const Manifest& m) {
    return guarded([&] {
        const RunSpec r = load(m);
        prepare_out(m.out);
        const Solution sol = solve(r.problem, r.solver);
        write_solution_csv(m.out / "solution.csv", sol);

        Json j;
        j["command"] = "solve";
        j["name"] = r.problem.name;
        j["status"] = std::string(to_string(sol.status));
        j["status_time"] = sol.status_time;
        j["reason"] = sol.reason;
        j["max_gradient"] = sol.max_gradient;
        j["sup_u"] = sup_norm(sol.u);
        double final_sup = 0.0;
        const std::size_t last = sol.u.nt() - 1;
        for (std::size_t k = 0; k < sol.u.nx(); ++k) final_sup = std::max(final_sup, std::abs(sol.u(last, k)));
        j["final_sup_u"] = final_sup;
        j["nx"] = sol.u.nx();
        j["dx"] = sol.u.nodes()[1] - sol.u.nodes()[0];
        j["nt"] = sol.u.nt();
        j["theta"] = r.solver.theta;
        j["step_log"] = to_json(sol.log);
        try {
            const auto c = check_compatibility(r.problem);
            j["compatibility"] = Json{{"residual_minus", c.minus}, {"residual_plus", c.plus}};
        } catch (const DomainError&) {
            j["compatibility"] = nullptr;
        }
        if (r.problem.exact) {
            const Program ex(*r.problem.exact);
            double err = 0.0;
            for (std::size_t i = 0; i < sol.u.nt(); ++i) {
                for (std::size_t k = 0; k < sol.u.nx(); ++k) {
                    const double e = ex(sol.u.times()[i], sol.u.nodes()[k], 0.0, 0.0);
                    err = std::max(err, std::abs(sol.u(i, k) - e));
                }
            }
            j["exact_error"] = err;
        } else {
            j["exact_error"] = nullptr;
        }
        write_text(m.out / "summary.json", dump_json(j));
        if (m.format == "csv") {
            std::string s = "key,value\n";
            for (const auto& [k, v] : j.items()) {
                if (v.is_object()) continue;
                s += k + "," + csv_field(v.is_number_float() ? format_double(v.get<double>())
                                         : v.is_string()     ? v.get<std::string>()
                                                             : v.dump()) + "\n";
            }
            write_text(m.out / "summary.csv", s);
        }
        std::cout << to_string(sol.status) << " at t = " << format_double(sol.status_time)
                  << ", max |u_x| = " << format_double(sol.max_gradient) << '\n';
        switch (sol.status) {
            case SolveStatus::completed: return static_cast<int>(ExitCode::ok);
            case SolveStatus::blowup_detected: return static_cast<int>(blowup);
            case SolveStatus::step_failure: return static_cast<int>(step_failure);
        }
        return static_cast<int>(input_error);
    });
}

int cmd_verify(const Manifest& m) {
    return guarded([&] {
        const RunSpec r = load(m);
        const auto summary_path = m.out / "summary.json";
        const auto solution_path = m.out / "solution.csv";
        for (const auto& p : {summary_path, solution_path}) {
            if (!fs::exists(p)) throw InputError("missing artifact " + p.string() + " (run solve first)");
        }
        const Solution sol = read_solution(solution_path, read_json_file(summary_path));
        const auto tol = env_tolerance();

        if (sol.status == SolveStatus::blowup_detected) {
            const PsiSpec psi = require_psi(r.certificate);
            Json j;
            int code = ExitCode::ok;
            try {
                const auto b = blowup_inequality(sol, psi, tol.value_or(0.0));
                j = to_json(b);
                j["divergent_integral"] = false;
                code = b.consistent ? static_cast<int>(ExitCode::ok) : static_cast<int>(violated);
                std::cout << "blow-up: lhs " << format_double(b.lhs) << " vs sup|u| "
                          << format_double(b.rhs) << (b.consistent ? " (consistent)" : " (inconsistent)")
                          << '\n';
            } catch (const DivergentIntegral& e) {
                j["kind"] = "blowup";
                j["divergent_integral"] = true;
                j["message"] = e.what();
                std::cout << "INCONSISTENT: " << e.what() << '\n';
                code = violated;
            }
            write_text(m.out / "verification.json", dump_json(j));
            return code;
        }
        if (sol.status != SolveStatus::completed) {
            throw InputError("the stored run did not complete; nothing to verify");
        }
        const auto cert_path = m.out / "certificate.json";
        const auto table_path = m.out / "h_table.csv";
        for (const auto& p : {cert_path, table_path}) {
            if (!fs::exists(p)) throw InputError("missing artifact " + p.string() + " (run certify first)");
        }
        const BarrierCertificate cert = barrier_from_files(read_json_file(cert_path), table_path);
        std::string sup_error;
        const auto sup = sup_cert_for(r, sup_error);
        const auto rep = bounds_check(sol, cert, sup ? &*sup : nullptr, tol.value_or(0.0));
        Json j = to_json(rep);
        write_text(m.out / "verification.json", dump_json(j));

        std::string w = "quantity,value,t,x,y\n";
        const auto row = [&](const char* name, double v, const Witness& wi) {
            w += std::string(name) + "," + format_double(v) + "," + format_double(wi.t) + "," +
                 format_double(wi.x) + "," + format_double(wi.y) + "\n";
        };
        row("max_w_tilde", rep.doubling.max_w_tilde, rep.doubling.w_witness);
        row("max_w1_tilde", rep.doubling.max_w1_tilde, rep.doubling.w1_witness);
        row("gradient_slack", rep.gradient_slack, rep.gradient_witness);
        row("modulus_slack", rep.doubling.modulus_slack, rep.doubling.modulus_witness);
        if (rep.sup_slack) row("sup_slack", *rep.sup_slack, rep.sup_witness);
        write_text(m.out / "witnesses.csv", w);
        if (m.format == "csv") {
            std::string s = "key,value\n";
            for (const auto& [k, v] : j.items()) {
                if (v.is_object()) continue;
                s += k + "," + (v.is_number_float() ? format_double(v.get<double>()) : v.dump()) + "\n";
            }
            write_text(m.out / "verification.csv", s);
        }
        std::cout << "max w~ " << format_double(rep.doubling.max_w_tilde) << ", gradient slack "
                  << format_double(rep.gradient_slack) << ", modulus slack "
                  << format_double(rep.doubling.modulus_slack) << ", tolerance "
                  << format_double(rep.tolerance) << (rep.passed() ? " (pass)" : " (FAIL)") << '\n';
        return rep.passed() ? static_cast<int>(ExitCode::ok) : static_cast<int>(violated);
    });
}

int cmd_sweep(const Manifest& m) {
    return guarded([&] {
        const RunSpec r = load(m);
        if (r.sweep.empty()) throw InputError("sweep axes are empty");
        const auto& c = r.certificate;
        std::string sup_error;
        const auto sup = sup_cert_for(r, sup_error);

        std::vector<double> q0s = r.sweep.q0;
        if (q0s.empty()) {
            if (!c.q0) throw InputError("certificate.q0 is required when the q0 axis is absent");
            q0s.push_back(*c.q0);
        }
        std::vector<double> Ms = r.sweep.M;
        if (Ms.empty()) Ms.push_back(resolve_M(r, sup));
        std::vector<std::string> psis = r.sweep.psi;
        if (psis.empty()) {
            if (!c.psi) throw InputError("certificate.psi is required when the psi axis is absent");
            psis.push_back(c.psi->str());
        }
        prepare_out(m.out);

        const Solution sol = solve(r.problem, r.solver);
        const double K = estimate_lipschitz(r.problem.u0, r.problem.ell);
        const auto opts = hypothesis_options(r);

        struct Point {
            double q0, M;
            std::string psi;
            std::string row;
        };
        std::vector<Point> pts;
        for (const auto& p : psis)
            for (double M : Ms)
                for (double q0 : q0s) pts.push_back({q0, M, p, {}});

        const auto eval_point = [&](Point& pt) {
            std::string status = "OK";
            std::string q1 = "", kappa0 = "", all = "", violated_names = "";
            std::string w = "", gs = "", ms = "", passed = "";
            try {
                const PsiSpec psi(parse(pt.psi));
                std::optional<BarrierCertificate> cert;
                try {
                    cert = build_barrier(psi, pt.q0, pt.M, K);
                    q1 = format_double(cert->q1);
                    kappa0 = format_double(cert->kappa0);
                } catch (const ConditionViolated&) {
                    status = "ConditionViolated";
                } catch (const PreconditionFailed&) {
                    status = "PreconditionFailed";
                }
                const double pmax = c.pmax > 0.0 ? c.pmax : (cert ? 4.0 * cert->q1 : 100.0);
                const auto rep = check_hypotheses(r.problem, pt.M, pt.q0, psi, pmax, opts);
                all = rep.all_satisfied() ? "true" : "false";
                for (const auto& e : rep.entries) {
                    if (e.satisfied) continue;
                    if (!violated_names.empty()) violated_names += ' ';
                    violated_names += e.name;
                }
                if (cert && sol.status == SolveStatus::completed) {
                    try {
                        const auto tol = env_tolerance();
                        const auto v = bounds_check(sol, *cert, nullptr, tol.value_or(0.0));
                        w = format_double(v.doubling.max_w_tilde);
                        gs = format_double(v.gradient_slack);
                        ms = format_double(v.doubling.modulus_slack);
                        passed = v.passed() ? "true" : "false";
                    } catch (const CertificateMismatch&) {
                        status = "CertificateMismatch";
                    }
                }
            } catch (const ConfigError&) {
                status = "ConfigError";
            } catch (const SyntaxError&) {
                status = "SyntaxError";
            } catch (const std::exception&) {
                status = "Error";
            }
            pt.row = format_double(pt.q0) + "," + format_double(pt.M) + "," + csv_field(pt.psi) + "," +
                     status + "," + q1 + "," + kappa0 + "," + format_double(K) + "," + all + "," +
                     violated_names + "," + w + "," + gs + "," + ms + "," + passed + "\n";
        };

        const unsigned jobs = std::max(1u, std::min<unsigned>(m.jobs, pts.size()));
        std::atomic<std::size_t> next{0};
        const auto worker = [&] {
            for (std::size_t i = next++; i < pts.size(); i = next++) eval_point(pts[i]);
        };
        std::vector<std::thread> pool;
        for (unsigned k = 1; k < jobs; ++k) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        std::string s =
            "q0,M,psi,status,q1,kappa0,K,all_satisfied,violated,max_w_tilde,gradient_slack,"
            "modulus_slack,passed\n";
        for (const auto& p : pts) s += p.row;
        write_text(m.out / "sweep.csv", s);
        std::cout << pts.size() << " sweep points written to " << (m.out / "sweep.csv").string() << '\n';
        return static_cast<int>(ExitCode::ok);
    });
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Barrier certificates, solver and verifier for parabolic problems with dynamic "
                 "boundary conditions"};
    app.require_subcommand(1);
    Manifest m;
    std::optional<int> nx;
    std::optional<double> dt0;
    std::optional<double> cutoff;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--spec", m.spec, "problem spec (JSON)")->required();
        sub->add_option("--out", m.out, "output directory");
        sub->add_option("--format", m.format, "report format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_flag("--strict", m.strict, "refuse incompatible initial data");
        sub->add_option("--jobs", m.jobs, "parallel sweep points")->check(CLI::PositiveNumber);
        sub->add_option("--nx", nx, "node count");
        sub->add_option("--dt0", dt0, "initial time step");
        sub->add_option("--cutoff", cutoff, "blow-up gradient cutoff");
    };
    const std::pair<const char*, const char*> subs[] = {
        {"certify", "check hypotheses, build the barrier and sup bound"},
        {"solve", "integrate the problem and write the solution"},
        {"verify", "check a solved run against its certificate"},
        {"sweep", "certify and verify over a parameter grid"},
    };
    for (const auto& [name, help] : subs) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        sub->callback([&m, name] { m.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(input_error);
    }
    m.nx = nx;
    m.dt0 = dt0;
    m.cutoff = cutoff;
    if (m.command == "certify") return cmd_certify(m);
    if (m.command == "solve") return cmd_solve(m);
    if (m.command == "verify") return cmd_verify(m);
    if (m.command == "sweep") return cmd_sweep(m);
    return input_error;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"dynbc"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace dynbc::cli
