#include "dynbc/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "dynbc/errors.hpp"

namespace dynbc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> linspace(double lo, double hi, int n) {
    if (n <= 1 || lo == hi) return {lo};
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

// Collapses an axis the sampled expressions do not depend on.
std::vector<double> axis(double lo, double hi, int n, bool used) {
    return used ? linspace(lo, hi, n) : std::vector<double>{lo};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

class Tracker {
public:
    explicit Tracker(std::string name) { e_.name = std::move(name); }

    void update(double margin, std::initializer_list<std::pair<const char*, double>> w) {
        if (std::isnan(margin)) margin = kInf;
        if (!seen_ || margin > e_.worst_violation) {
            seen_ = true;
            e_.worst_violation = margin;
            e_.witness.clear();
            for (const auto& [k, v] : w) e_.witness.emplace_back(k, v);
        }
    }

    // Evaluates fn(), recording a failed evaluation as an infinite violation.
    template <class Fn>
    void sample(Fn&& fn, std::initializer_list<std::pair<const char*, double>> w) {
        double m;
        try {
            m = fn();
        } catch (const DomainError& err) {
            m = kInf;
            if (e_.note.empty()) e_.note = std::string("evaluation failed: ") + err.what();
        }
        update(m, w);
    }

    void note(std::string s) {
        if (!e_.note.empty()) e_.note += "; ";
        e_.note += std::move(s);
    }

    ConditionEntry finish() {
        e_.satisfied = e_.worst_violation <= 0.0;
        return std::move(e_);
    }

private:
    ConditionEntry e_;
    bool seen_ = false;
};

bool uses(const Expr& e, Var v) { return e.depends_on(v); }

// Growth primitive G(y) = int_0^y dr / Phi(r), accumulated over doubling
// shells [2^k, 2^(k+1)] so that huge arguments stay accurate.
class GrowthPrimitive {
public:
    explicit GrowthPrimitive(const Expr& Phi) : prog_(Phi) {
        f_ = [this](double r) { return 1.0 / prog_(0.0, 0.0, r, r); };
        cum_.push_back(numerics::adaptive_simpson(f_, 0.0, 1.0));  // G(1)
    }

    double operator()(double y) {
        if (y <= 0.0) return 0.0;
        if (y <= 1.0) return numerics::adaptive_simpson(f_, 0.0, y);
        const int k = std::min(std::ilogb(y), 1023);
        extend(k);
        const double lo = std::ldexp(1.0, k);
        return cum_[static_cast<std::size_t>(k)] + numerics::adaptive_simpson(f_, lo, y);
    }

    // Smallest y >= 0 with G(y) = s; +inf when s is beyond double range.
    double inverse(double s) {
        if (!(s > 0.0)) return 0.0;
        if (s <= cum_[0]) {
            return numerics::brent_root([&](double y) { return (*this)(y) - s; }, 0.0, 1.0,
                                        1e-15 * (1.0 + s), 1e-16);
        }
        int k = 0;
        while (true) {
            if (k >= 1022) return kInf;
            extend(k + 1);
            if (cum_[static_cast<std::size_t>(k + 1)] >= s) break;
            ++k;
        }
        const double lo = std::ldexp(1.0, k);
        return numerics::brent_root([&](double y) { return (*this)(y) - s; }, lo, 2.0 * lo,
                                    1e-15 * (1.0 + s), 1e-16 * lo);
    }

private:
    void extend(int k) {
        while (static_cast<int>(cum_.size()) <= k) {
            const int j = static_cast<int>(cum_.size()) - 1;  // cum_[j] = G(2^j)
            const double lo = std::ldexp(1.0, j);
            cum_.push_back(cum_.back() + numerics::adaptive_simpson(f_, lo, 2.0 * lo));
        }
    }

    Program prog_;
    numerics::ScalarFn f_;
    std::vector<double> cum_;
};

}  // namespace

// ---------------------------------------------------------------------------

PsiSpec::PsiSpec(Expr psi, double sample_max) : expr_(std::move(psi)) {
    for (Var v : {Var::t, Var::x, Var::z}) {
        if (expr_.depends_on(v)) {
            throw ConfigError("psi may only depend on p, found " + std::string(to_string(v)));
        }
    }
    prog_ = Program(expr_);
    const Program dpsi(diff(expr_, Var::p));
    for (double rho : linspace(0.0, sample_max, 2001)) {
        double v;
        double dv;
        try {
            v = prog_(0.0, 0.0, 0.0, rho);
            dv = dpsi(0.0, 0.0, 0.0, rho);
        } catch (const DomainError& e) {
            throw ConfigError("psi cannot be evaluated at rho = " + fmt(rho) + ": " + e.what());
        }
        if (!std::isfinite(v) || !std::isfinite(dv)) {
            throw ConfigError("psi or psi' is not finite at rho = " + fmt(rho));
        }
        if (v < 1.0) throw ConfigError("psi must be >= 1, got " + fmt(v) + " at rho = " + fmt(rho));
    }
}

PsiSpec PsiSpec::parse(std::string_view text, double sample_max) {
    return PsiSpec(dynbc::parse(text), sample_max);
}

numerics::ImproperIntegral probe_growth_integral(const PsiSpec& psi, double lower) {
    return numerics::probe_improper_integral([&](double r) { return r / psi(r); }, lower);
}

double find_q1(const PsiSpec& psi, double q0, double M) {
    if (!(q0 > 0.0)) throw PreconditionFailed("q0 must be positive");
    if (!(M > 0.0)) throw PreconditionFailed("M must be positive");
    const double target = 2.0 * M;
    const auto probe = probe_growth_integral(psi, q0);
    if (probe.converges && probe.value <= target) {
        throw ConditionViolated("(9)", "integral of rho/psi from q0 to infinity is " +
                                           fmt(probe.value) + " <= 2M = " + fmt(target));
    }
    const auto f = [&](double r) { return r / psi(r); };

    // Expand [lo, hi] until the accumulated integral passes the target.
    double lo = q0;
    double acc = 0.0;
    double step = std::max(q0, 1.0);
    double hi = q0 + step;
    double inc = numerics::adaptive_simpson(f, lo, hi);
    while (acc + inc < target) {
        acc += inc;
        lo = hi;
        step *= 2.0;
        if (step > 1e300) {
            throw ConditionViolated("(9)", "integral of rho/psi stays below 2M = " + fmt(target));
        }
        hi = q0 + step;
        inc = numerics::adaptive_simpson(f, lo, hi);
    }
    const double base = acc;
    const double a = lo;
    const auto F = [&](double q) { return base + numerics::adaptive_simpson(f, a, q) - target; };
    return numerics::brent_root(F, lo, hi, 1e-11 * (1.0 + target), 0.0);
}

BarrierCertificate build_barrier(const PsiSpec& psi, double q0, double M, double K,
                                 const BarrierOptions& opt) {
    if (K > q0) {
        throw PreconditionFailed("Lipschitz bound K = " + fmt(K) + " exceeds q0 = " + fmt(q0));
    }
    BarrierCertificate c;
    c.psi = psi.expr().str();
    c.q0 = q0;
    c.M = M;
    c.K = K;
    c.q1 = find_q1(psi, q0, M);
    c.kappa0 = numerics::adaptive_simpson([&](double r) { return 1.0 / psi(r); }, q0, c.q1);

    // h'' = -psi(|h'|), h(0) = 0, h'(0) = q1, integrated until h' = q0.
    const auto rhs = [&](double g) { return -psi(std::abs(g)); };
    const double dg_target = opt.resolution * (c.q1 - q0);
    double xi = 0.0;
    double h = 0.0;
    double g = c.q1;
    c.xi.push_back(xi);
    c.h.push_back(h);
    c.dh.push_back(g);
    for (std::size_t step = 0;; ++step) {
        if (step >= opt.max_steps) throw Error("barrier integration exceeded the step limit");
        // Also cap the change of h' relative to h' itself; matters when q1 >> q0.
        const double dg = std::min(dg_target, opt.relative_resolution * std::abs(g));
        const double d = dg / psi(std::abs(g));
        const double k1h = g;
        const double k1g = rhs(g);
        const double k2h = g + 0.5 * d * k1g;
        const double k2g = rhs(g + 0.5 * d * k1g);
        const double k3h = g + 0.5 * d * k2g;
        const double k3g = rhs(g + 0.5 * d * k2g);
        const double k4h = g + d * k3g;
        const double k4g = rhs(g + d * k3g);
        const double h1 = h + d / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
        const double g1 = g + d / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        if (g1 > q0) {
            xi += d;
            h = h1;
            g = g1;
            c.xi.push_back(xi);
            c.h.push_back(h);
            c.dh.push_back(g);
            continue;
        }
        // Cubic Hermite dense output on the last step; locate h' = q0.
        const double s0 = rhs(g);
        const double s1 = rhs(g1);
        const auto herm = [d](double y0, double y1, double m0, double m1, double s) {
            const double u = s / d;
            const double u2 = u * u;
            const double u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * d * m0 +
                   (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * d * m1;
        };
        double a = 0.0;
        double b = d;
        for (int it = 0; it < 200 && b - a > 1e-17 * (xi + d); ++it) {
            const double m = 0.5 * (a + b);
            if (herm(g, g1, s0, s1, m) > q0) {
                a = m;
            } else {
                b = m;
            }
        }
        const double s = 0.5 * (a + b);
        const double hs = herm(h, h1, g, g1, s);
        if (s > 0.0) {
            c.xi.push_back(xi + s);
            c.h.push_back(hs);
            c.dh.push_back(q0);
        } else {
            c.dh.back() = q0;
        }
        c.kappa0_ode = xi + s;
        break;
    }
    return c;
}

double estimate_lipschitz(const Expr& u0, double ell, int samples) {
    const Program d(diff(u0, Var::x));
    double m = 0.0;
    for (double x : linspace(-ell, ell, samples)) m = std::max(m, std::abs(d(0.0, x, 0.0, 0.0)));
    return m * (1.0 + 1e-6);
}

CompatibilityResiduals check_compatibility(const ProblemSpec& spec) {
    const Program u(spec.u0);
    const Program ux(diff(spec.u0, Var::x));
    const Program uxx(diff(diff(spec.u0, Var::x), Var::x));
    CompatibilityResiduals r;
    for (Side s : {Side::minus, Side::plus}) {
        const double x = spec.x_of(s);
        const double z = u(0.0, x, 0.0, 0.0);
        double res;
        if (const auto* d = std::get_if<DirichletBC>(&spec.bc(s))) {
            res = std::abs(z - eval(d->value, Env{0.0, x, 0.0, 0.0}));
        } else {
            const auto& dyn = std::get<DynamicBC>(spec.bc(s));
            const Env env{0.0, x, z, ux(0.0, x, 0.0, 0.0)};
            double lhs = -outward_sign(s) * eval(dyn.b, env) * env.p + eval(dyn.g, env);
            if (dyn.g1) lhs += eval(*dyn.g1, env);
            double rhs = eval(spec.a, env) * uxx(0.0, x, 0.0, 0.0) + eval(spec.f, env);
            if (spec.f1) rhs += eval(*spec.f1, env);
            res = std::abs(lhs - rhs);
        }
        (s == Side::plus ? r.plus : r.minus) = res;
    }
    return r;
}

bool ConditionReport::all_satisfied() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.satisfied; });
}

const ConditionEntry* ConditionReport::find(std::string_view name) const {
    for (const auto& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

numerics::ImproperIntegral probe_phi_integral(const Expr& Phi) {
    const Program p(Phi);
    return numerics::probe_improper_integral([&](double r) { return 1.0 / p(0.0, 0.0, r, r); }, 0.0);
}

ConditionEntry check_upc(const ProblemSpec& spec, double zmax, double pmax, int n) {
    // Zero margins count as met, as for every strict condition here.
    Tracker tr("(upc)");
    const Program a(spec.a);
    const double T = spec.T;
    const double ell = spec.ell;
    const bool ut = uses(spec.a, Var::t);
    const bool ux = uses(spec.a, Var::x);
    const bool uz = uses(spec.a, Var::z);
    const bool up = uses(spec.a, Var::p);
    for (double t : axis(0.0, T, n, ut))
        for (double x : axis(-ell, ell, n, ux))
            for (double z : axis(-zmax, zmax, n, uz))
                for (double p : axis(-pmax, pmax, n, up))
                    tr.sample([&] { return -a(t, x, z, p); }, {{"t", t}, {"x", x}, {"z", z}, {"p", p}});
    for (Side s : {Side::minus, Side::plus}) {
        const auto* dyn = std::get_if<DynamicBC>(&spec.bc(s));
        if (!dyn) continue;
        const Program b(dyn->b);
        const Program bp(diff(dyn->b, Var::p));
        const Program gp(diff(dyn->g, Var::p));
        const double x = spec.x_of(s);
        const double sg = outward_sign(s);
        for (double t : linspace(0.0, T, n))
            for (double z : linspace(-zmax, zmax, n))
                for (double p : linspace(-pmax, pmax, n)) {
                    tr.sample([&] { return -b(t, x, z, p); }, {{"x", x}, {"t", t}, {"z", z}, {"p", p}});
                    tr.sample([&] { return -(bp(t, x, z, p) * p + b(t, x, z, p) - sg * gp(t, x, z, p)); },
                              {{"x", x}, {"t", t}, {"z", z}, {"p", p}});
                }
    }
    return tr.finish();
}

ConditionReport check_hypotheses(const ProblemSpec& spec, double M, double q0, const PsiSpec& psi,
                                 double pmax, const HypothesisOptions& opt) {
    ConditionReport report;
    auto& out = report.entries;
    const double T = spec.T;
    const double ell = spec.ell;
    const int n = opt.samples;

    std::optional<double> q1;
    try {
        q1 = find_q1(psi, q0, M);
    } catch (const Error&) {
    }
    if (!(pmax > 0.0)) pmax = q1 ? 4.0 * *q1 : 100.0;

    const Program a(spec.a);
    const Program f(spec.f);
    const Program f1(spec.f1 ? *spec.f1 : Expr::constant(0.0));

    // (6): |f| <= a psi(|p|)
    {
        Tracker tr("(6)");
        const bool ut = uses(spec.a, Var::t) || uses(spec.f, Var::t);
        const bool ux = uses(spec.a, Var::x) || uses(spec.f, Var::x);
        const bool uz = uses(spec.a, Var::z) || uses(spec.f, Var::z);
        for (double t : axis(0.0, T, n, ut))
            for (double x : axis(-ell, ell, n, ux))
                for (double z : axis(-M, M, n, uz))
                    for (double p : linspace(-pmax, pmax, n))
                        tr.sample([&] { return std::abs(f(t, x, z, p)) - a(t, x, z, p) * psi(std::abs(p)); },
                                  {{"t", t}, {"x", x}, {"z", z}, {"p", p}});
        out.push_back(tr.finish());
    }

    // (9): int_{q0}^inf rho/psi > 2M
    {
        Tracker tr("(9)");
        const auto probe = probe_growth_integral(psi, q0);
        const double margin = probe.converges ? 2.0 * M - probe.value
                                              : std::min(2.0 * M - probe.value, 0.0);
        tr.update(margin, {{"upper_limit", probe.last_limit}, {"integral", probe.value}});
        tr.note(probe.converges ? "integral converges" : "integral diverges");
        out.push_back(tr.finish());
    }

    // (9bNEU) at each dynamic end, both sign cases.
    {
        Tracker tr("(9bNEU)");
        bool any = false;
        for (Side s : {Side::minus, Side::plus}) {
            const auto* dyn = std::get_if<DynamicBC>(&spec.bc(s));
            if (!dyn) continue;
            any = true;
            const Program b(dyn->b);
            const Program g(dyn->g);
            const double x = spec.x_of(s);
            const double sg = outward_sign(s);
            const bool ut = uses(dyn->b, Var::t) || uses(dyn->g, Var::t);
            const bool uz = uses(dyn->b, Var::z) || uses(dyn->g, Var::z);
            for (double t : axis(0.0, T, n, ut))
                for (double z : axis(-M, M, n, uz))
                    for (double p : linspace(q0, pmax, n)) {
                        // +g(t,l,z,p) <= b p and -g(t,l,z,-p) <= b(-p) p at x = l;
                        // mirrored at x = -l.
                        tr.sample([&] { return sg * g(t, x, z, p) - b(t, x, z, p) * p; },
                                  {{"x", x}, {"t", t}, {"z", z}, {"p", p}});
                        tr.sample([&] { return -sg * g(t, x, z, -p) - b(t, x, z, -p) * p; },
                                  {{"x", x}, {"t", t}, {"z", z}, {"p", -p}});
                    }
        }
        if (!any) {
            tr.update(-kInf, {});
            tr.note("no dynamic boundary");
        }
        out.push_back(tr.finish());
    }

    // (10): K <= q0
    {
        Tracker tr("(10)");
        const double K = estimate_lipschitz(spec.u0, ell, opt.lipschitz_samples);
        tr.update(K - q0, {{"K", K}, {"q0", q0}});
        out.push_back(tr.finish());
    }

    out.push_back(check_upc(spec, M, pmax, n));

    // (66): compatibility at t = 0.
    {
        Tracker tr("(66)");
        try {
            const auto r = check_compatibility(spec);
            tr.update(r.max() - opt.compat_tol, {{"residual_plus", r.plus}, {"residual_minus", r.minus}});
        } catch (const DomainError& e) {
            tr.update(kInf, {});
            tr.note(std::string("evaluation failed: ") + e.what());
        }
        out.push_back(tr.finish());
    }

    // (266): int^inf rho/psi = inf
    {
        Tracker tr("(266)");
        const auto probe = probe_growth_integral(psi, q0);
        tr.update(probe.converges ? probe.value : -probe.value,
                  {{"upper_limit", probe.last_limit}, {"integral", probe.value}});
        tr.note(probe.converges ? "integral converges" : "integral diverges");
        out.push_back(tr.finish());
    }

    // (225)-(227) for the extra terms, non-strict on ordered tuples.
    bool has_g1 = false;
    for (Side s : {Side::minus, Side::plus}) {
        if (const auto* d = std::get_if<DynamicBC>(&spec.bc(s)); d && d->g1) has_g1 = true;
    }
    if (spec.f1 || has_g1) {
        const int m = opt.pair_samples;
        const auto ts = linspace(0.0, T, m);
        const auto xs = linspace(-ell, ell, m);
        const auto zs = linspace(-M, M, m);
        const auto ps0 = linspace(0.0, pmax, m);
        const auto psq = linspace(q0, pmax, m);
        {
            Tracker tr("(225)");
            for (double t : ts)
                for (std::size_t i = 0; i < xs.size(); ++i)
                    for (std::size_t j = i; j < xs.size(); ++j)
                        for (std::size_t k = 0; k < zs.size(); ++k)
                            for (std::size_t l = k; l < zs.size(); ++l)
                                for (double p : ps0)
                                    for (double sg : {1.0, -1.0}) {
                                        const double x = xs[i];
                                        const double y = xs[j];
                                        const double z1 = zs[k];
                                        const double z2 = zs[l];
                                        tr.sample([&] { return -(f1(t, y, z1, sg * p) - f1(t, x, z2, sg * p)); },
                                                  {{"t", t}, {"x", x}, {"y", y}, {"z1", z1}, {"z2", z2}, {"p", sg * p}});
                                    }
            out.push_back(tr.finish());
        }
        const auto g1_at = [&](Side s) -> std::optional<Program> {
            const auto* d = std::get_if<DynamicBC>(&spec.bc(s));
            if (!d) return std::nullopt;
            return Program(d->g1 ? *d->g1 : Expr::constant(0.0));
        };
        const auto g1p = g1_at(Side::plus);
        const auto g1m = g1_at(Side::minus);
        {
            Tracker tr("(226)");
            if (g1p) {
                for (double t : ts)
                    for (double x : xs)
                        for (std::size_t k = 0; k < zs.size(); ++k)
                            for (std::size_t l = k; l < zs.size(); ++l)
                                for (std::size_t i = 0; i < psq.size(); ++i)
                                    for (std::size_t j = i; j < psq.size(); ++j)
                                        for (double sg : {1.0, -1.0}) {
                                            const double z1 = zs[k];
                                            const double z2 = zs[l];
                                            const double p1 = sg * psq[i];
                                            const double p2 = sg * psq[j];
                                            tr.sample([&] { return -(f1(t, x, z1, p1) - (*g1p)(t, ell, z2, p2)); },
                                                      {{"t", t}, {"x", x}, {"z1", z1}, {"z2", z2}, {"p1", p1}, {"p2", p2}});
                                        }
            } else {
                tr.update(-kInf, {});
                tr.note("right end is not dynamic");
            }
            out.push_back(tr.finish());
        }
        {
            Tracker tr("(227)");
            for (double t : ts)
                for (double x : xs)
                    for (std::size_t k = 0; k < zs.size(); ++k)
                        for (std::size_t l = k; l < zs.size(); ++l)
                            for (std::size_t j = 0; j < psq.size(); ++j)
                                for (std::size_t i = j; i < psq.size(); ++i) {
                                    // p2 = psq[j] <= p1 = psq[i]
                                    const double z1 = zs[k];
                                    const double z2 = zs[l];
                                    const double p1 = psq[i];
                                    const double p2 = psq[j];
                                    if (g1p) {
                                        tr.sample([&] { return -((*g1p)(t, ell, z1, -p1) - f1(t, x, z2, -p2)); },
                                                  {{"t", t}, {"x", x}, {"z1", z1}, {"z2", z2}, {"p1", -p1}, {"p2", -p2}});
                                    }
                                    if (g1m) {
                                        tr.sample([&] { return -((*g1m)(t, -ell, z1, p1) - f1(t, x, z2, p2)); },
                                                  {{"t", t}, {"x", x}, {"z1", z1}, {"z2", z2}, {"p1", p1}, {"p2", p2}});
                                    }
                                }
            if (!g1p && !g1m) {
                tr.update(-kInf, {});
                tr.note("no dynamic boundary");
            }
            out.push_back(tr.finish());
        }
    }

    if (opt.growth) {
        const Program Phi(opt.growth->Phi);
        const double B = opt.growth->B;
        {
            Tracker tr("(209b)");
            Expr ftot = spec.f1 ? Expr::binary(BinaryOp::add, spec.f, *spec.f1) : spec.f;
            const Program F(ftot);
            const double zmax = opt.zmax;
            for (double t : axis(0.0, T, n, uses(ftot, Var::t)))
                for (double x : axis(-ell, ell, n, uses(ftot, Var::x)))
                    for (double z : linspace(-zmax, zmax, 4 * n))
                        tr.sample([&] {
                            const double r = std::abs(z);
                            return z * F(t, x, z, 0.0) - Phi(0.0, 0.0, r, r) * r - B;
                        }, {{"t", t}, {"x", x}, {"z", z}});
            for (Side s : {Side::minus, Side::plus}) {
                const auto* dyn = std::get_if<DynamicBC>(&spec.bc(s));
                if (!dyn) continue;
                Expr gtot = dyn->g1 ? Expr::binary(BinaryOp::add, dyn->g, *dyn->g1) : dyn->g;
                const Program G(gtot);
                const double x = spec.x_of(s);
                for (double t : axis(0.0, T, n, uses(gtot, Var::t)))
                    for (double z : linspace(-zmax, zmax, 4 * n))
                        for (double p : axis(-pmax, pmax, n, uses(gtot, Var::p)))
                            tr.sample([&] {
                                const double r = std::abs(z);
                                return z * G(t, x, z, p) - Phi(0.0, 0.0, r, r) * r - B;
                            }, {{"x", x}, {"t", t}, {"z", z}, {"p", p}});
            }
            out.push_back(tr.finish());
        }
        {
            // Divergence of int_0^inf dr/Phi, and Phi positive non-decreasing.
            Tracker tr("(phi)");
            const auto probe = probe_phi_integral(opt.growth->Phi);
            tr.update(probe.converges ? probe.value : -probe.value,
                      {{"upper_limit", probe.last_limit}, {"integral", probe.value}});
            tr.note(probe.converges ? "integral converges" : "integral diverges");
            const auto rs = linspace(0.0, std::max(opt.zmax, 1.0), 2001);
            double prev = 0.0;
            for (std::size_t i = 0; i < rs.size(); ++i) {
                const double r = rs[i];
                double v = 0.0;
                tr.sample([&] {
                    v = Phi(0.0, 0.0, r, r);
                    return v > 0.0 ? -kInf : -v;
                }, {{"r", r}});
                if (i > 0) tr.update(prev > v ? prev - v : -kInf, {{"r", r}});
                prev = v;
            }
            out.push_back(tr.finish());
        }
    }
    return report;
}

SupBoundCertificate sup_bound(const Expr& Phi, double B, double u0_sup, double T) {
    if (!(B > 0.0)) throw PreconditionFailed("B must be positive");
    if (!(T > 0.0)) throw PreconditionFailed("T must be positive");
    const Program P(Phi);
    for (double r : linspace(0.0, 1000.0, 2001)) {
        const double v = P(0.0, 0.0, r, r);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw PreconditionFailed("Phi must be positive, got " + fmt(v) + " at r = " + fmt(r));
        }
    }
    const auto probe = probe_phi_integral(Phi);
    if (probe.converges) {
        throw ConditionViolated("(phi)", "integral of 1/Phi converges to " + fmt(probe.value));
    }

    SupBoundCertificate c;
    c.Phi = Phi;
    c.B = B;
    c.u0_sup = std::abs(u0_sup);
    c.T = T;

    GrowthPrimitive G(Phi);
    const double cB = B / P(0.0, 0.0, 0.0, 0.0);
    const double Gu = G(c.u0_sup);
    // Bounds as a function of s = log10(lambda - 1); phi^{-1}(y) = exp(G(y)).
    const auto bound = [&](double s, bool with_time) {
        const double lam = 1.0 + std::pow(10.0, s);
        const double shift = with_time ? lam * T : 0.0;
        const double top = std::max({0.0, G(cB / (lam - 1.0)) + shift, Gu + shift});
        return G.inverse(top);
    };
    const auto minimize = [&](bool with_time, double& lambda) {
        int best_k = -6;
        double best = kInf;
        for (int k = -6; k <= 6; ++k) {
            const double v = bound(k, with_time);
            if (v < best) {
                best = v;
                best_k = k;
            }
        }
        const double lo = std::max(-6.0, best_k - 1.0);
        const double hi = std::min(6.0, best_k + 1.0);
        double s_best = best_k;
        const double s = numerics::golden_section_min([&](double x) { return bound(x, with_time); }, lo,
                                                      hi, 1e-10);
        const double v = bound(s, with_time);
        if (v < best) {
            best = v;
            s_best = s;
        }
        lambda = 1.0 + std::pow(10.0, s_best);
        return best;
    };
    c.M_paper = minimize(false, c.lambda_star_paper);
    c.M_proof = minimize(true, c.lambda_star);
    return c;
}

}  // namespace dynbc
