#include "dynbc/holder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynbc/errors.hpp"
#include "dynbc/numerics.hpp"

namespace dynbc {

namespace {

void require_increasing(const std::vector<double>& axis, const char* name) {
    for (std::size_t i = 1; i < axis.size(); ++i) {
        if (!(axis[i] > axis[i - 1])) {
            throw InvalidGrid(std::string(name) + " must be strictly increasing");
        }
    }
}

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw PreconditionFailed("Hoelder exponent must lie in (0, 1], got " + std::to_string(alpha));
    }
}

double ratio(double du, double d, double alpha) {
    return std::abs(du) / std::pow(std::abs(d), alpha);
}

}  // namespace

GridFunction::GridFunction(std::vector<double> times, std::vector<double> nodes,
                           std::vector<double> values)
    : times_(std::move(times)), nodes_(std::move(nodes)), values_(std::move(values)) {
    if (times_.empty() || nodes_.empty()) throw InvalidGrid("grid axes must be non-empty");
    require_increasing(times_, "times");
    require_increasing(nodes_, "nodes");
    if (values_.size() != times_.size() * nodes_.size()) {
        throw InvalidGrid("value count " + std::to_string(values_.size()) + " does not match " +
                          std::to_string(times_.size()) + " x " + std::to_string(nodes_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw InvalidGrid("grid values must be finite");
    }
}

GridFunction GridFunction::sample(std::vector<double> times, std::vector<double> nodes,
                                  const std::function<double(double, double)>& u) {
    std::vector<double> values;
    values.reserve(times.size() * nodes.size());
    for (double t : times) {
        for (double x : nodes) values.push_back(u(t, x));
    }
    return GridFunction(std::move(times), std::move(nodes), std::move(values));
}

GridFunction GridFunction::scaled(double lambda) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= lambda;
    return GridFunction(times_, nodes_, std::move(v));
}

GridFunction GridFunction::plus(const GridFunction& other) const {
    if (other.times_ != times_ || other.nodes_ != nodes_) {
        throw InvalidGrid("grid geometries differ");
    }
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
    return GridFunction(times_, nodes_, std::move(v));
}

GridFunction GridFunction::restricted(const std::vector<std::size_t>& time_idx,
                                      const std::vector<std::size_t>& node_idx) const {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> v;
    for (auto i : time_idx) t.push_back(times_.at(i));
    for (auto j : node_idx) x.push_back(nodes_.at(j));
    for (auto i : time_idx) {
        for (auto j : node_idx) v.push_back((*this)(i, j));
    }
    return GridFunction(std::move(t), std::move(x), std::move(v));
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t max_points) {
    std::vector<std::size_t> idx;
    if (n == 0) return idx;
    if (n <= max_points || max_points < 2) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    const std::size_t stride = (n - 1 + max_points - 3) / (max_points - 2);
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    return idx;
}

double sup_norm(const GridFunction& u) {
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
}

double holder_seminorm(const GridFunction& u, double alpha, Axis axis, const ScanLimits& lim) {
    require_alpha(alpha);
    const std::size_t n_axis = axis == Axis::x ? u.nx() : u.nt();
    if (n_axis < 2) throw DegenerateGrid("seminorm needs at least 2 points on the scanned axis");
    const auto ti = subsample_indices(u.nt(), lim.max_points);
    const auto xi = subsample_indices(u.nx(), lim.max_points);
    const auto& t = u.times();
    const auto& x = u.nodes();

    double best = 0.0;
    if (axis == Axis::x) {
        for (auto i : ti) {
            const double* row = u.row(i);
            for (std::size_t a = 0; a < xi.size(); ++a) {
                for (std::size_t b = a + 1; b < xi.size(); ++b) {
                    best = std::max(best, ratio(row[xi[b]] - row[xi[a]], x[xi[b]] - x[xi[a]], alpha));
                }
            }
        }
    } else {
        for (auto j : xi) {
            for (std::size_t a = 0; a < ti.size(); ++a) {
                for (std::size_t b = a + 1; b < ti.size(); ++b) {
                    best = std::max(best, ratio(u(ti[b], j) - u(ti[a], j), t[ti[b]] - t[ti[a]], alpha));
                }
            }
        }
    }
    return best;
}

GridFunction grid_derivative(const GridFunction& u, int t_order, int x_order) {
    if (t_order < 0 || x_order < 0 || t_order > 2 || x_order > 2) {
        throw PreconditionFailed("derivative orders must lie in 0..2");
    }
    const std::size_t nt = u.nt();
    const std::size_t nx = u.nx();
    std::vector<double> values = u.values();
    if (x_order > 0) {
        if (nx < 3) throw DegenerateGrid("x-derivative needs at least 3 nodes");
        for (std::size_t i = 0; i < nt; ++i) {
            const std::span<const double> row(values.data() + i * nx, nx);
            const auto d = numerics::differentiate(u.nodes(), row, x_order);
            std::copy(d.begin(), d.end(), values.begin() + static_cast<std::ptrdiff_t>(i * nx));
        }
    }
    if (t_order > 0) {
        if (nt < 3) throw DegenerateGrid("t-derivative needs at least 3 time levels");
        std::vector<double> col(nt);
        for (std::size_t j = 0; j < nx; ++j) {
            for (std::size_t i = 0; i < nt; ++i) col[i] = values[i * nx + j];
            const auto d = numerics::differentiate(u.times(), col, t_order);
            for (std::size_t i = 0; i < nt; ++i) values[i * nx + j] = d[i];
        }
    }
    return GridFunction(u.times(), u.nodes(), std::move(values));
}

HolderReport parabolic_norm(const GridFunction& u, int k, double alpha, const ScanLimits& lim) {
    require_alpha(alpha);
    if (k < 0 || k > 2) throw PreconditionFailed("parabolic order k must be 0, 1 or 2");
    const std::size_t need = k == 0 ? 2 : 3;
    if (u.nt() < need || u.nx() < need) {
        throw DegenerateGrid("grid too small for order " + std::to_string(k) + ": need " +
                             std::to_string(need) + " points per axis");
    }
    HolderReport r;
    r.k = k;
    r.alpha = alpha;
    r.sup_norm = sup_norm(u);
    r.stride_t = u.nt() > lim.max_points ? subsample_indices(u.nt(), lim.max_points)[1] : 1;
    r.stride_x = u.nx() > lim.max_points ? subsample_indices(u.nx(), lim.max_points)[1] : 1;

    const double half = 0.5 * alpha;
    const double upper = 0.5 * (1.0 + alpha);
    auto top = [&](const GridFunction& d) {
        r.semi_x += holder_seminorm(d, alpha, Axis::x, lim);
        r.semi_t += holder_seminorm(d, half, Axis::t, lim);
    };

    r.derivative_sum = r.sup_norm;
    if (k == 0) {
        top(u);
    } else if (k == 1) {
        const auto ux = grid_derivative(u, 0, 1);
        r.derivative_sum += sup_norm(ux);
        top(ux);
        r.semi_t += holder_seminorm(u, upper, Axis::t, lim);
    } else {
        const auto ux = grid_derivative(u, 0, 1);
        const auto uxx = grid_derivative(u, 0, 2);
        const auto ut = grid_derivative(u, 1, 0);
        r.derivative_sum += sup_norm(ux) + sup_norm(uxx) + sup_norm(ut);
        top(uxx);
        top(ut);
        r.semi_t += holder_seminorm(ux, upper, Axis::t, lim);
    }
    r.parabolic_semi = r.semi_x + r.semi_t;
    r.norm = r.derivative_sum + r.parabolic_semi;
    return r;
}

InterpolationRatios interpolation_diagnostic(const GridFunction& u, double alpha,
                                             const ScanLimits& lim) {
    require_alpha(alpha);
    InterpolationRatios out;
    out.u0 = sup_norm(u);
    if (out.u0 == 0.0) return out;

    const auto report = parabolic_norm(u, 2, alpha, lim);
    out.u2a = report.parabolic_semi;
    const auto ux = grid_derivative(u, 0, 1);
    const auto uxx = grid_derivative(u, 0, 2);
    const auto ut = grid_derivative(u, 1, 0);
    const double half = 0.5 * alpha;
    const std::array<double, 3> numerators{
        sup_norm(ut) + sup_norm(uxx),
        holder_seminorm(ux, alpha, Axis::x, lim) + holder_seminorm(ux, half, Axis::t, lim),
        holder_seminorm(u, alpha, Axis::x, lim) + holder_seminorm(u, half, Axis::t, lim),
    };
    const std::array<double, 3> theta{1.0 / (2.0 + alpha), (1.0 + alpha) / (2.0 + alpha),
                                      alpha / (2.0 + alpha)};
    for (std::size_t i = 0; i < 3; ++i) {
        const double denom = std::pow(out.u2a, theta[i]) * std::pow(out.u0, 1.0 - theta[i]);
        if (denom == 0.0) {
            if (numerators[i] != 0.0) {
                throw ZeroDenominator("interpolation ratio " + std::to_string(i + 1) +
                                      " has a zero denominator but non-zero numerator");
            }
            out.ratios[i] = 0.0;
        } else {
            out.ratios[i] = numerators[i] / denom;
        }
    }
    return out;
}

}  // namespace dynbc
