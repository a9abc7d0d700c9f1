#include "dynbc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "dynbc/certificate.hpp"
#include "dynbc/errors.hpp"
#include "dynbc/numerics.hpp"

namespace dynbc {

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::completed: return "Completed";
        case SolveStatus::blowup_detected: return "BlowUpDetected";
        case SolveStatus::step_failure: return "StepFailure";
    }
    return "?";
}

namespace {

Expr sum(const Expr& a, const std::optional<Expr>& b) {
    return b ? Expr::binary(BinaryOp::add, a, *b) : a;
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Gaussian elimination with partial pivoting; used only when the bordered
// tridiagonal reduction meets a tiny pivot.
void solve_dense(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(A[i * n + k]) > std::abs(A[piv * n + k])) piv = i;
        }
        if (A[piv * n + k] == 0.0) throw std::runtime_error("singular Newton matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = A[i * n + k] / A[k * n + k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) A[i * n + j] -= f * A[k * n + j];
            b[i] -= f * b[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= A[k * n + j] * b[j];
        b[k] = s / A[k * n + k];
    }
}

// (I - c J) d = r for the bordered tridiagonal J; pinned rows become d = r.
void solve_newton_system(const Semidiscretization::Jacobian& J, double c, bool pin_first,
                         bool pin_last, std::vector<double> r, std::vector<double>& d) {
    const std::size_t n = J.diag.size();
    std::vector<double> lo(n), di(n), up(n);
    for (std::size_t j = 0; j < n; ++j) {
        lo[j] = -c * J.lower[j];
        di[j] = 1.0 - c * J.diag[j];
        up[j] = -c * J.upper[j];
    }
    double e0 = -c * J.extra_first;
    double en = -c * J.extra_last;
    if (pin_first) {
        di[0] = 1.0;
        up[0] = 0.0;
        e0 = 0.0;
    }
    if (pin_last) {
        di[n - 1] = 1.0;
        lo[n - 1] = 0.0;
        en = 0.0;
    }
    constexpr double tiny = 1e-300;
    const bool ok_first = e0 == 0.0 || std::abs(up[1]) > tiny;
    const bool ok_last = en == 0.0 || std::abs(lo[n - 2]) > tiny;
    if (ok_first && ok_last) {
        if (e0 != 0.0) {
            const double f = e0 / up[1];
            di[0] -= f * lo[1];
            up[0] -= f * di[1];
            r[0] -= f * r[1];
        }
        if (en != 0.0) {
            const double f = en / lo[n - 2];
            di[n - 1] -= f * up[n - 2];
            lo[n - 1] -= f * di[n - 2];
            r[n - 1] -= f * r[n - 2];
        }
        try {
            d.resize(n);
            numerics::solve_tridiagonal(lo, di, up, r, d);
            return;
        } catch (const std::runtime_error&) {
        }
    }
    std::vector<double> A(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        A[j * n + j] = di[j];
        if (j > 0) A[j * n + j - 1] = lo[j];
        if (j + 1 < n) A[j * n + j + 1] = up[j];
    }
    A[2] += e0;
    A[(n - 1) * n + n - 3] += en;
    solve_dense(A, r, n);
    d = std::move(r);
}

}  // namespace

Semidiscretization::Coef::Coef(const Expr& e) : v(e), dz(diff(e, Var::z)), dp(diff(e, Var::p)) {}

Semidiscretization::Semidiscretization(const ProblemSpec& spec, int nx) : spec_(spec) {
    if (nx < 5) throw ConfigError("nx must be at least 5");
    spec.validate();
    nodes_.resize(static_cast<std::size_t>(nx));
    dx_ = 2.0 * spec.ell / (nx - 1);
    for (int j = 0; j < nx; ++j) nodes_[static_cast<std::size_t>(j)] = -spec.ell + j * dx_;
    nodes_.back() = spec.ell;
    a_ = Coef(spec.a);
    f_ = Coef(sum(spec.f, spec.f1));
    for (Side s : {Side::minus, Side::plus}) {
        End& e = s == Side::plus ? plus_ : minus_;
        if (const auto* d = std::get_if<DirichletBC>(&spec.bc(s))) {
            e.dirichlet = true;
            e.value = Program(d->value);
            e.dvalue = Program(diff(d->value, Var::t));
        } else {
            const auto& dyn = std::get<DynamicBC>(spec.bc(s));
            e.b = Coef(dyn.b);
            e.g = Coef(sum(dyn.g, dyn.g1));
        }
    }
}

bool Semidiscretization::pinned(Side s) const {
    return (s == Side::plus ? plus_ : minus_).dirichlet;
}

double Semidiscretization::pinned_value(Side s, double t) const {
    return (s == Side::plus ? plus_ : minus_).value(t, spec_.x_of(s), 0.0, 0.0);
}

std::vector<double> Semidiscretization::gradient(std::span<const double> u) const {
    const std::size_t n = size();
    std::vector<double> p(n);
    const double h2 = 2.0 * dx_;
    p[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / h2;
    for (std::size_t j = 1; j + 1 < n; ++j) p[j] = (u[j + 1] - u[j - 1]) / h2;
    p[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / h2;
    return p;
}

std::vector<double> Semidiscretization::initial() const {
    const Program u0(spec_.u0);
    std::vector<double> u(size());
    for (std::size_t j = 0; j < size(); ++j) u[j] = u0(0.0, nodes_[j], 0.0, 0.0);
    if (minus_.dirichlet) u.front() = pinned_value(Side::minus, 0.0);
    if (plus_.dirichlet) u.back() = pinned_value(Side::plus, 0.0);
    return u;
}

void Semidiscretization::rhs(double t, std::span<const double> u, std::span<double> out) const {
    const std::size_t n = size();
    const double h2 = 2.0 * dx_;
    const double hh = dx_ * dx_;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double x = nodes_[j];
        const double p = (u[j + 1] - u[j - 1]) / h2;
        const double d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / hh;
        out[j] = a_.v(t, x, u[j], p) * d2 + f_.v(t, x, u[j], p);
    }
    const auto end = [&](const End& e, Side s, std::size_t j, double p) {
        const double x = nodes_[j];
        if (e.dirichlet) return e.dvalue(t, x, 0.0, 0.0);
        // u_t = -(outward sign) b u_x + g
        return -outward_sign(s) * e.b.v(t, x, u[j], p) * p + e.g.v(t, x, u[j], p);
    };
    out[0] = end(minus_, Side::minus, 0, (-3.0 * u[0] + 4.0 * u[1] - u[2]) / h2);
    out[n - 1] = end(plus_, Side::plus, n - 1, (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / h2);
}

void Semidiscretization::jacobian(double t, std::span<const double> u, Jacobian& J) const {
    const std::size_t n = size();
    J.lower.assign(n, 0.0);
    J.diag.assign(n, 0.0);
    J.upper.assign(n, 0.0);
    J.extra_first = 0.0;
    J.extra_last = 0.0;
    const double h2 = 2.0 * dx_;
    const double hh = dx_ * dx_;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double x = nodes_[j];
        const double z = u[j];
        const double p = (u[j + 1] - u[j - 1]) / h2;
        const double d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / hh;
        const double a = a_.v(t, x, z, p);
        const double az = a_.dz(t, x, z, p);
        const double ap = a_.dp(t, x, z, p);
        const double fz = f_.dz(t, x, z, p);
        const double fp = f_.dp(t, x, z, p);
        const double dFdp = ap * d2 + fp;
        J.lower[j] = -dFdp / h2 + a / hh;
        J.diag[j] = az * d2 - 2.0 * a / hh + fz;
        J.upper[j] = dFdp / h2 + a / hh;
    }
    // F = -s b(z,p) p + g(z,p) with p = sum_k w_k u_k.
    const auto end = [&](const End& e, Side s, std::size_t j, double p, double& dz, double& dp) {
        if (e.dirichlet) {
            dz = dp = 0.0;
            return;
        }
        const double x = nodes_[j];
        const double z = u[j];
        const double sg = outward_sign(s);
        dz = -sg * e.b.dz(t, x, z, p) * p + e.g.dz(t, x, z, p);
        dp = -sg * (e.b.dp(t, x, z, p) * p + e.b.v(t, x, z, p)) + e.g.dp(t, x, z, p);
    };
    double dz;
    double dp;
    end(minus_, Side::minus, 0, (-3.0 * u[0] + 4.0 * u[1] - u[2]) / h2, dz, dp);
    J.diag[0] = dz - 3.0 * dp / h2;
    J.upper[0] = 4.0 * dp / h2;
    J.extra_first = -dp / h2;
    end(plus_, Side::plus, n - 1, (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / h2, dz, dp);
    J.diag[n - 1] = dz + 3.0 * dp / h2;
    J.lower[n - 1] = -4.0 * dp / h2;
    J.extra_last = dp / h2;
}

namespace {

// In strict mode the problem must satisfy the compatibility condition and a
// sampled uniform-parabolicity check around the initial data.
void strict_checks(const ProblemSpec& spec, const SolverConfig& cfg) {
    const auto r = check_compatibility(spec);
    if (r.max() > cfg.compat_tol) {
        throw ConfigError("compatibility residuals (minus " + std::to_string(r.minus) + ", plus " +
                          std::to_string(r.plus) + ") exceed tolerance");
    }
    const Program u0(spec.u0);
    const Program du0(diff(spec.u0, Var::x));
    double zmax = 0.0;
    double pmax = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = -spec.ell + 2.0 * spec.ell * i / 200;
        zmax = std::max(zmax, std::abs(u0(0, x, 0, 0)));
        pmax = std::max(pmax, std::abs(du0(0, x, 0, 0)));
    }
    const auto entry = check_upc(spec, 2.0 * zmax + 1.0, 2.0 * pmax + 1.0, 9);
    if (!entry.satisfied) {
        throw ConfigError("uniform parabolicity fails on the sampled box (margin " +
                          std::to_string(entry.worst_violation) + ")");
    }
}

class Stepper {
public:
    Stepper(const Semidiscretization& sd, const SolverConfig& cfg)
        : sd_(sd), cfg_(cfg), n_(sd.size()) {}

    // One theta step from (t, u) of size dt; false if Newton fails.
    bool step(double t, double dt, double theta, std::span<const double> u, std::vector<double>& out) {
        try {
            return step_impl(t, dt, theta, u, out);
        } catch (const DomainError&) {
            return false;
        } catch (const std::runtime_error&) {
            return false;
        }
    }

private:
    bool step_impl(double t, double dt, double theta, std::span<const double> u,
                   std::vector<double>& U) {
        const double t1 = t + dt;
        const bool pin0 = sd_.pinned(Side::minus);
        const bool pinN = sd_.pinned(Side::plus);
        std::vector<double> F0(n_, 0.0);
        if (theta < 1.0) sd_.rhs(t, u, F0);
        U.assign(u.begin(), u.end());
        if (pin0) U.front() = sd_.pinned_value(Side::minus, t1);
        if (pinN) U.back() = sd_.pinned_value(Side::plus, t1);

        std::vector<double> F(n_);
        std::vector<double> R(n_);
        const auto residual = [&](const std::vector<double>& V, std::vector<double>& out) {
            sd_.rhs(t1, V, F);
            for (std::size_t j = 0; j < n_; ++j) {
                out[j] = V[j] - u[j] - dt * (theta * F[j] + (1.0 - theta) * F0[j]);
                if (!std::isfinite(out[j])) return false;
            }
            if (pin0) out.front() = 0.0;
            if (pinN) out.back() = 0.0;
            return true;
        };
        if (!residual(U, R)) return false;
        double rn = inf_norm(R);
        if (rn == 0.0) return true;

        Semidiscretization::Jacobian J;
        std::vector<double> d;
        std::vector<double> trial(n_);
        std::vector<double> Rt(n_);
        for (int it = 0; it < cfg_.newton_max_iter; ++it) {
            sd_.jacobian(t1, U, J);
            std::vector<double> rhs(n_);
            for (std::size_t j = 0; j < n_; ++j) rhs[j] = -R[j];
            solve_newton_system(J, theta * dt, pin0, pinN, std::move(rhs), d);
            const double dn = inf_norm(d);
            if (!std::isfinite(dn)) return false;
            const double scale = cfg_.newton_tol * (1.0 + inf_norm(U));
            if (dn <= scale) {
                for (std::size_t j = 0; j < n_; ++j) U[j] += d[j];
                return true;
            }
            double lambda = 1.0;
            bool accepted = false;
            while (lambda >= 1.0 / 256.0) {
                for (std::size_t j = 0; j < n_; ++j) trial[j] = U[j] + lambda * d[j];
                bool ok = false;
                try {
                    ok = residual(trial, Rt);
                } catch (const DomainError&) {
                    ok = false;
                }
                if (ok) {
                    const double tn = inf_norm(Rt);
                    if (tn <= (1.0 - 1e-4 * lambda) * rn || lambda * dn <= scale) {
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if (!accepted) return false;
            U.swap(trial);
            R.swap(Rt);
            rn = inf_norm(R);
            if (lambda * dn <= scale) return true;
        }
        return false;
    }

    const Semidiscretization& sd_;
    const SolverConfig& cfg_;
    std::size_t n_;
};

}  // namespace

Solution solve(const ProblemSpec& spec, const SolverConfig& cfg) {
    if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
    if (!(cfg.dt0 > 0.0)) throw ConfigError("dt0 must be positive");
    if (!(cfg.dt_min > 0.0)) throw ConfigError("dt_min must be positive");
    if (!(cfg.gradient_cutoff > 0.0)) throw ConfigError("gradient cutoff must be positive");
    if (!(cfg.local_error_tol > 0.0)) throw ConfigError("local error tolerance must be positive");
    const Semidiscretization sd(spec, cfg.nx);
    if (cfg.strict_compatibility) strict_checks(spec, cfg);

    const double T = spec.T;
    const double dt_max = cfg.dt_max > 0.0 ? cfg.dt_max : T / 10.0;
    const std::size_t n = sd.size();

    Solution sol;
    std::vector<double> times{0.0};
    std::vector<double> values;
    std::vector<double> u;
    try {
        u = sd.initial();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("initial datum cannot be evaluated: ") + e.what());
    }
    for (double v : u) {
        if (!std::isfinite(v)) throw ConfigError("initial datum is not finite on the grid");
    }
    values.insert(values.end(), u.begin(), u.end());

    const auto grad_max = [&](const std::vector<double>& v) { return inf_norm(sd.gradient(v)); };
    sol.max_gradient = grad_max(u);

    Stepper stepper(sd, cfg);
    double t = 0.0;
    double dt = std::min({cfg.dt0, dt_max, T});
    const int p_order = cfg.theta == 0.5 ? 2 : 1;
    std::vector<double> full;
    std::vector<double> half;
    std::vector<double> half2;

    auto finish_status = [&](SolveStatus s, std::string reason) {
        sol.status = s;
        sol.reason = std::move(reason);
    };

    if (sol.max_gradient > cfg.gradient_cutoff) {
        finish_status(SolveStatus::blowup_detected, "initial gradient exceeds cutoff");
    } else {
        while (true) {
            if (T - t <= 1e-14 * T) {
                t = T;
                times.back() = T;
                finish_status(SolveStatus::completed, "");
                break;
            }
            if (sol.log.accepted + sol.log.rejected >= cfg.max_steps) {
                finish_status(SolveStatus::step_failure, "step limit reached");
                break;
            }
            if (t + dt > T || T - (t + dt) < 1e-10 * dt) dt = T - t;

            double theta = cfg.theta;
            bool ok = stepper.step(t, dt, theta, u, full);
            if (ok && cfg.adaptive) {
                ok = stepper.step(t, 0.5 * dt, theta, u, half) &&
                     stepper.step(t + 0.5 * dt, 0.5 * dt, theta, half, half2);
            }
            if (!ok && theta != 1.0) {
                ++sol.log.newton_failures;
                ++sol.log.theta_fallbacks;
                theta = 1.0;
                ok = stepper.step(t, dt, theta, u, full);
                if (ok && cfg.adaptive) {
                    ok = stepper.step(t, 0.5 * dt, theta, u, half) &&
                         stepper.step(t + 0.5 * dt, 0.5 * dt, theta, half, half2);
                }
            }
            if (!ok) {
                ++sol.log.newton_failures;
                ++sol.log.rejected;
                dt *= 0.25;
                if (dt < cfg.dt_min) {
                    finish_status(SolveStatus::step_failure, "Newton failed with dt below dt_min");
                    break;
                }
                continue;
            }

            double factor = 1.0;
            if (cfg.adaptive) {
                const int p = theta == 0.5 ? p_order : 1;
                const double denom = std::pow(2.0, p) - 1.0;
                double err = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double e = std::abs(half2[j] - full[j]) / denom;
                    err = std::max(err, e / (cfg.local_error_tol * (1.0 + std::abs(half2[j]))));
                }
                factor = err > 0.0 ? 0.9 * std::pow(err, -1.0 / (p + 1)) : 4.0;
                factor = std::clamp(factor, 0.2, 4.0);
                if (!(err <= 1.0)) {
                    ++sol.log.rejected;
                    dt *= std::min(factor, 0.9);
                    if (dt < cfg.dt_min) {
                        finish_status(SolveStatus::step_failure, "step size fell below dt_min");
                        break;
                    }
                    continue;
                }
                u.swap(half2);
            } else {
                u.swap(full);
            }
            t += dt;
            ++sol.log.accepted;
            if (std::abs(T - t) <= 1e-14 * T) t = T;
            times.push_back(t);
            values.insert(values.end(), u.begin(), u.end());
            const double g = grad_max(u);
            sol.max_gradient = std::max(sol.max_gradient, g);
            if (g > cfg.gradient_cutoff) {
                finish_status(SolveStatus::blowup_detected, "gradient exceeded cutoff");
                break;
            }
            dt = std::min(dt * factor, dt_max);
            if (t >= T) {
                finish_status(SolveStatus::completed, "");
                break;
            }
        }
    }
    sol.status_time = times.back();

    // Derived fields on every stored level.
    std::vector<double> gx;
    std::vector<double> gt;
    gx.reserve(values.size());
    gt.reserve(values.size());
    std::vector<double> F(n);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const std::span<const double> row(values.data() + i * n, n);
        const auto g = sd.gradient(row);
        gx.insert(gx.end(), g.begin(), g.end());
        try {
            sd.rhs(times[i], row, F);
        } catch (const DomainError&) {
            std::fill(F.begin(), F.end(), std::numeric_limits<double>::quiet_NaN());
        }
        for (double& v : F) {
            if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
        }
        gt.insert(gt.end(), F.begin(), F.end());
    }
    sol.u = GridFunction(times, sd.nodes(), std::move(values));
    sol.ux = GridFunction(times, sd.nodes(), std::move(gx));
    sol.ut = GridFunction(std::move(times), sd.nodes(), std::move(gt));
    return sol;
}

}  // namespace dynbc
