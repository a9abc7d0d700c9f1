#include "dynbc/problem.hpp"

#include <cmath>

#include "dynbc/errors.hpp"

namespace dynbc {

void ProblemSpec::validate() const {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("ell must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be positive");
    for (Var v : {Var::t, Var::z, Var::p}) {
        if (u0.depends_on(v)) {
            throw ConfigError("initial datum u0 may only depend on x, found " +
                              std::string(to_string(v)));
        }
    }
    for (Side s : {Side::minus, Side::plus}) {
        if (const auto* d = std::get_if<DirichletBC>(&bc(s))) {
            for (Var v : {Var::x, Var::z, Var::p}) {
                if (d->value.depends_on(v)) {
                    throw ConfigError("Dirichlet value may only depend on t");
                }
            }
        }
    }
}

}  // namespace dynbc
