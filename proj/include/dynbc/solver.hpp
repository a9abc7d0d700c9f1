#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dynbc/expr.hpp"
#include "dynbc/holder.hpp"
#include "dynbc/problem.hpp"

namespace dynbc {

struct SolverConfig {
    int nx = 65;                  // nodes including both ends
    double dt0 = 1e-3;
    double theta = 0.5;           // 0.5 Crank-Nicolson, 1 backward Euler
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
    double dt_min = 1e-12;
    double dt_max = 0.0;          // <= 0: T / 10
    double gradient_cutoff = 1e6;
    double local_error_tol = 1e-8;
    bool strict_compatibility = false;
    double compat_tol = 1e-8;
    std::size_t max_steps = 2'000'000;
    bool adaptive = true;         // false: fixed steps of dt0
};

enum class SolveStatus { completed, blowup_detected, step_failure };

std::string_view to_string(SolveStatus s);

struct StepLog {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t newton_failures = 0;
    std::size_t theta_fallbacks = 0;
};

struct Solution {
    GridFunction u;   // every accepted time level
    GridFunction ux;
    GridFunction ut;  // semi-discrete right-hand side at each level
    SolveStatus status = SolveStatus::completed;
    double status_time = 0.0;   // last accepted time
    double max_gradient = 0.0;  // max |u_x| over all stored levels
    std::string reason;
    StepLog log;
};

// Method-of-lines form of the problem on a uniform grid: centered
// differences inside, one-sided second-order gradients at the ends, an ODE
// per dynamic end and a pinned value per Dirichlet end.
class Semidiscretization {
public:
    Semidiscretization(const ProblemSpec& spec, int nx);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    double dx() const { return dx_; }
    bool pinned(Side s) const;
    double pinned_value(Side s, double t) const;

    // du/dt at every node. Pinned ends get d/dt of their prescribed value.
    void rhs(double t, std::span<const double> u, std::span<double> out) const;

    // dF/du as a tridiagonal matrix plus one extra entry per boundary row
    // (column 2 in row 0, column n-3 in row n-1). Pinned rows are zero.
    struct Jacobian {
        std::vector<double> lower, diag, upper;
        double extra_first = 0.0;
        double extra_last = 0.0;
    };
    void jacobian(double t, std::span<const double> u, Jacobian& J) const;

    // Discrete u_x at every node, same stencils as rhs().
    std::vector<double> gradient(std::span<const double> u) const;
    std::vector<double> initial() const;

private:
    struct Coef {
        Program v, dz, dp;
        explicit Coef(const Expr& e);
        Coef() = default;
    };
    struct End {
        bool dirichlet = false;
        Coef b, g;
        Program value, dvalue;
    };

    ProblemSpec spec_;
    std::vector<double> nodes_;
    double dx_ = 0.0;
    Coef a_, f_;
    End minus_, plus_;
};

// Throws ConfigError on invalid settings or, in strict mode, when the
// compatibility residual exceeds compat_tol.
Solution solve(const ProblemSpec& spec, const SolverConfig& cfg);

}  // namespace dynbc
