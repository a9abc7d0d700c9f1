#pragma once
// Shared fixtures for the unit tests and the acceptance runner.

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynbc/certificate.hpp"
#include "dynbc/expr.hpp"
#include "dynbc/problem.hpp"

namespace fixtures {

inline dynbc::DynamicBC dyn(const char* b, const char* g, const char* g1 = nullptr) {
    dynbc::DynamicBC bc{dynbc::parse(b), dynbc::parse(g), std::nullopt};
    if (g1) bc.g1 = dynbc::parse(g1);
    return bc;
}

// One hand-built hypothesis instance with a violating and a satisfied variant.
struct HypothesisTwin {
    std::string condition;
    dynbc::ProblemSpec violating;
    dynbc::ProblemSpec satisfied;
    double M = 1.0;
    double q0 = 1.0;
    std::string psi = "1+p^2";
    double pmax = 10.0;
    std::optional<dynbc::GrowthBound> growth_violating;
    std::optional<dynbc::GrowthBound> growth_satisfied;
    double expected_violation = 0.0;  // exact worst margin of the violating variant
    double violation_tol = 1e-12;
    std::vector<std::pair<std::string, double>> expected_witness;  // subset of the witness keys
    double witness_tol = 1e-12;
};

inline std::vector<HypothesisTwin> hypothesis_twins() {
    using dynbc::parse;
    std::vector<HypothesisTwin> out;
    {
        // |2p^2| - (1+p^2) peaks at |p| = pmax = 10.
        HypothesisTwin c;
        c.condition = "(6)";
        c.violating.f = parse("2*p^2");
        c.satisfied.f = parse("p^2");
        c.expected_violation = 99.0;
        c.expected_witness = {{"p", -10.0}};
        out.push_back(c);
    }
    {
        // g = 2 at the right end: 2 - p is largest at p = q0 = 1.
        HypothesisTwin c;
        c.condition = "(9bNEU)";
        c.violating.bc_plus = dyn("1", "2");
        c.satisfied.bc_plus = dyn("1", "0.5");
        c.expected_violation = 1.0;
        c.expected_witness = {{"x", 1.0}, {"p", 1.0}};
        out.push_back(c);
    }
    {
        // b + b_p p - g_p = 1 - p/10 at the right end, negative past p = 10.
        HypothesisTwin c;
        c.condition = "(upc)";
        c.pmax = 20.0;
        c.violating.bc_plus = dyn("1", "p^2/20");
        c.satisfied.bc_plus = dyn("1", "p^2/100");
        c.expected_violation = 1.0;
        c.expected_witness = {{"x", 1.0}, {"p", 20.0}};
        out.push_back(c);
    }
    {
        // u0 = x^2: -b p + g - (a u0'' + f) = -2 - 2 at both ends.
        HypothesisTwin c;
        c.condition = "(66)";
        c.M = 2.0;
        c.q0 = 3.0;
        c.violating.u0 = parse("x^2");
        c.satisfied.u0 = parse("0");
        c.expected_violation = 4.0 - 1e-8;
        c.violation_tol = 1e-9;
        c.expected_witness = {{"residual_plus", 4.0}, {"residual_minus", 4.0}};
        c.witness_tol = 1e-9;
        out.push_back(c);
    }
    {
        // f1 = z increases in z; the ordered pair z1 = -M, z2 = M is worst.
        HypothesisTwin c;
        c.condition = "(225)";
        c.violating.f1 = parse("z");
        c.violating.bc_minus = dyn("1", "0", "-z");
        c.violating.bc_plus = dyn("1", "0", "-z");
        c.satisfied.f1 = parse("-z");
        c.satisfied.bc_minus = dyn("1", "0", "-z");
        c.satisfied.bc_plus = dyn("1", "0", "-z");
        c.expected_violation = 2.0;
        c.expected_witness = {{"z1", -1.0}, {"z2", 1.0}};
        out.push_back(c);
    }
    {
        // g1 = 1 - z at the right end sits above f1 = -z.
        HypothesisTwin c;
        c.condition = "(226)";
        c.violating.f1 = parse("-z");
        c.violating.bc_minus = dyn("1", "0", "-z");
        c.violating.bc_plus = dyn("1", "0", "1-z");
        c.satisfied = c.violating;
        c.satisfied.bc_plus = dyn("1", "0", "-z");
        c.expected_violation = 1.0;
        out.push_back(c);
    }
    {
        // g1 = -1 - z at the left end sits below f1 = -z.
        HypothesisTwin c;
        c.condition = "(227)";
        c.violating.f1 = parse("-z");
        c.violating.bc_minus = dyn("1", "0", "-1-z");
        c.violating.bc_plus = dyn("1", "0", "-z");
        c.satisfied = c.violating;
        c.satisfied.bc_minus = dyn("1", "0", "-z");
        c.expected_violation = 1.0;
        out.push_back(c);
    }
    {
        // z (2 - z^3) <= |z| + B needs B >= max(z - z^4) = 3/4^(4/3) ~ 0.4725.
        HypothesisTwin c;
        c.condition = "(209b)";
        c.violating.f = parse("2-z^3");
        c.violating.bc_minus = dyn("1", "2-z^3");
        c.violating.bc_plus = dyn("1", "2-z^3");
        c.satisfied = c.violating;
        c.growth_violating = dynbc::GrowthBound{parse("1"), 0.4};
        c.growth_satisfied = dynbc::GrowthBound{parse("1"), 0.5};
        // Sampled on a z grid, so only approximately the continuum maximum.
        c.expected_violation = 3.0 / std::pow(4.0, 4.0 / 3.0) - 0.4;
        c.violation_tol = 2e-2;
        c.expected_witness = {{"z", std::pow(0.25, 1.0 / 3.0)}};
        c.witness_tol = 0.1;
        out.push_back(c);
    }
    return out;
}

// Random admissible barrier parameters.
//   psi family, uniformly: c, c*(1+p), c*(1+p^2) with c in [1, 3], or
//   (1+p^2)^1.5, whose integral of rho/psi from q0 is finite.
//   q0 uniform in [0.1, 3].
//   M uniform in [0.05, 2]; for the finite-integral family M is instead
//   0.45 * U(0.1, 1) * (1+q0^2)^(-1/2), below half the available integral.
struct BarrierCase {
    std::string psi;
    double q0;
    double M;
};

inline std::vector<BarrierCase> random_barrier_cases(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> family(0, 3);
    std::uniform_real_distribution<double> cdist(1.0, 3.0);
    std::uniform_real_distribution<double> q0dist(0.1, 3.0);
    std::uniform_real_distribution<double> Mdist(0.05, 2.0);
    std::uniform_real_distribution<double> frac(0.1, 1.0);
    std::vector<BarrierCase> out;
    char buf[64];
    for (int i = 0; i < n; ++i) {
        const int k = family(rng);
        const double c = cdist(rng);
        const double q0 = q0dist(rng);
        double M = Mdist(rng);
        std::string psi;
        switch (k) {
            case 0: std::snprintf(buf, sizeof buf, "%.6f", c); psi = buf; break;
            case 1: std::snprintf(buf, sizeof buf, "%.6f*(1+p)", c); psi = buf; break;
            case 2: std::snprintf(buf, sizeof buf, "%.6f*(1+p^2)", c); psi = buf; break;
            default:
                psi = "(1+p^2)^1.5";
                M = 0.45 * frac(rng) / std::sqrt(1.0 + q0 * q0);
        }
        out.push_back({psi, q0, M});
    }
    return out;
}

}  // namespace fixtures
