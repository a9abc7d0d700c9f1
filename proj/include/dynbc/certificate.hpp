#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynbc/expr.hpp"
#include "dynbc/numerics.hpp"
#include "dynbc/problem.hpp"

namespace dynbc {

// Gradient growth function rho -> psi(rho), written in the variable p.
class PsiSpec {
public:
    // Samples psi on [0, sample_max]; throws ConfigError when psi < 1, when
    // psi or psi' is not finite, or when psi depends on t, x or z.
    explicit PsiSpec(Expr psi, double sample_max = 1000.0);
    static PsiSpec parse(std::string_view text, double sample_max = 1000.0);

    double operator()(double rho) const { return prog_(0.0, 0.0, 0.0, rho); }
    const Expr& expr() const { return expr_; }

private:
    Expr expr_;
    Program prog_;
};

struct BarrierCertificate {
    std::string psi;  // printed form of the growth function
    double q0 = 0.0;
    double q1 = 0.0;
    double kappa0 = 0.0;      // integral of 1/psi over [q0, q1]
    double kappa0_ode = 0.0;  // where the integrated h' hit q0
    double M = 0.0;
    double K = 0.0;
    // Table of (xi, h, h') from 0 to the event, at the RK4 steps.
    std::vector<double> xi;
    std::vector<double> h;
    std::vector<double> dh;

    double gradient_bound() const { return q1; }
    double h_end() const { return h.empty() ? 0.0 : h.back(); }
    numerics::MonotoneCubic interpolant() const { return {xi, h, dh}; }
};

struct BarrierOptions {
    double resolution = 1e-4;           // h' change per step as a fraction of q1 - q0
    double relative_resolution = 1e-3;  // and as a fraction of the current h'
    std::size_t max_steps = 10'000'000;
};

// Integral of rho / psi(rho) over [lower, inf), probed by doubling.
numerics::ImproperIntegral probe_growth_integral(const PsiSpec& psi, double lower);

// q1 with int_{q0}^{q1} rho/psi = 2M.
double find_q1(const PsiSpec& psi, double q0, double M);

BarrierCertificate build_barrier(const PsiSpec& psi, double q0, double M, double K,
                                 const BarrierOptions& opt = {});

// max |u0'| over evenly spaced samples of [-ell, ell], times (1 + 1e-6).
double estimate_lipschitz(const Expr& u0, double ell, int samples = 10000);

struct CompatibilityResiduals {
    double plus = 0.0;
    double minus = 0.0;
    double max() const { return plus > minus ? plus : minus; }
};

// Mismatch between the boundary equation and the interior equation at t = 0
// and x = +-ell. For a Dirichlet end it is |u0(+-ell) - value(0)|.
CompatibilityResiduals check_compatibility(const ProblemSpec& spec);

struct ConditionEntry {
    std::string name;
    bool satisfied = true;
    // Signed margin: <= 0 means satisfied. Strict inequalities are treated
    // as non-strict at the sample points.
    double worst_violation = 0.0;
    std::vector<std::pair<std::string, double>> witness;
    std::string note;
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;

    bool all_satisfied() const;
    const ConditionEntry* find(std::string_view name) const;
};

struct GrowthBound {
    Expr Phi;  // in the variable p (z is set to the same value)
    double B = 0.0;
};

struct HypothesisOptions {
    int samples = 33;       // per axis for box conditions
    int pair_samples = 9;   // per axis for the ordered-pair conditions
    double zmax = 100.0;    // |z| range for the sup-bound growth condition
    double compat_tol = 1e-8;
    int lipschitz_samples = 10000;
    std::optional<GrowthBound> growth;  // enables (209b) and (phi)
};

// Uniform parabolicity: a > 0 on [0,T] x [-ell,ell] x [-zmax,zmax] x
// [-pmax,pmax], and b > 0, b_p p + b -/+ g_p > 0 at each dynamic end.
ConditionEntry check_upc(const ProblemSpec& spec, double zmax, double pmax, int samples);

// Runs every applicable condition. pmax <= 0 picks 4*q1 when q1 exists,
// else 100.
ConditionReport check_hypotheses(const ProblemSpec& spec, double M, double q0, const PsiSpec& psi,
                                 double pmax, const HypothesisOptions& opt = {});

struct SupBoundCertificate {
    Expr Phi;
    double B = 0.0;
    double u0_sup = 0.0;
    double T = 0.0;
    double M_paper = 0.0;  // the bound without the exponential time factor
    double M_proof = 0.0;  // with e^{lambda T} applied inside phi
    double lambda_star = 0.0;        // minimizer for M_proof
    double lambda_star_paper = 0.0;  // minimizer for M_paper (a limit value when it is +inf)
};

// Integral of 1/Phi over [0, inf) probed by doubling.
numerics::ImproperIntegral probe_phi_integral(const Expr& Phi);

SupBoundCertificate sup_bound(const Expr& Phi, double B, double u0_sup, double T);

}  // namespace dynbc
