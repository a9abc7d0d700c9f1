#pragma once

#include <optional>
#include <string>
#include <variant>

#include "dynbc/expr.hpp"

namespace dynbc {

// u_t -/+ b u_x = g (+ g1) at x = -/+ ell; the sign makes +-u_x the outward
// normal derivative.
struct DynamicBC {
    Expr b;
    Expr g;
    std::optional<Expr> g1;
};

// u(t, +-ell) = value(t)
struct DirichletBC {
    Expr value;
};

using BoundaryCondition = std::variant<DynamicBC, DirichletBC>;

enum class Side { minus, plus };

inline double outward_sign(Side s) { return s == Side::plus ? 1.0 : -1.0; }

// u_t - a(t,x,u,u_x) u_xx = f(t,x,u,u_x) (+ f1) on (0,T) x (-ell, ell) with
// boundary conditions at both ends and u(0,.) = u0.
struct ProblemSpec {
    std::string name;
    double ell = 1.0;
    double T = 1.0;
    Expr a = Expr::constant(1.0);
    Expr f = Expr::constant(0.0);
    std::optional<Expr> f1;
    BoundaryCondition bc_minus = DynamicBC{Expr::constant(1.0), Expr::constant(0.0), std::nullopt};
    BoundaryCondition bc_plus = DynamicBC{Expr::constant(1.0), Expr::constant(0.0), std::nullopt};
    Expr u0 = Expr::constant(0.0);
    // Reference solution u(t,x), when one is known; only used for error reports.
    std::optional<Expr> exact;

    const BoundaryCondition& bc(Side s) const { return s == Side::plus ? bc_plus : bc_minus; }
    double x_of(Side s) const { return s == Side::plus ? ell : -ell; }

    // Throws ConfigError for non-positive ell/T, an initial datum depending
    // on anything but x, or Dirichlet data depending on anything but t.
    void validate() const;
};

}  // namespace dynbc
