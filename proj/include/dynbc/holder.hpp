#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace dynbc {

// Samples u(times[i], nodes[j]) on a tensor grid, stored row-major by time.
class GridFunction {
public:
    GridFunction() = default;
    // Throws InvalidGrid if the axes are not strictly increasing, the value
    // count does not match, or any value is non-finite.
    GridFunction(std::vector<double> times, std::vector<double> nodes, std::vector<double> values);

    static GridFunction sample(std::vector<double> times, std::vector<double> nodes,
                               const std::function<double(double, double)>& u);

    std::size_t nt() const { return times_.size(); }
    std::size_t nx() const { return nodes_.size(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * nodes_.size() + j]; }
    const double* row(std::size_t i) const { return values_.data() + i * nodes_.size(); }

    GridFunction scaled(double lambda) const;
    GridFunction plus(const GridFunction& other) const;  // same geometry required
    GridFunction restricted(const std::vector<std::size_t>& time_idx,
                            const std::vector<std::size_t>& node_idx) const;

private:
    std::vector<double> times_;
    std::vector<double> nodes_;
    std::vector<double> values_;
};

enum class Axis { x, t };

// Indices 0, s, 2s, ... plus the last index, at most max_points of them.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t max_points);

struct ScanLimits {
    std::size_t max_points = 512;  // per axis, before the O(N^2) pair scans
};

double sup_norm(const GridFunction& u);

// Largest |u(a) - u(b)| / |a - b|^alpha over grid pairs along the axis,
// maximized over the other axis. The exponent is applied exactly as given.
double holder_seminorm(const GridFunction& u, double alpha, Axis axis, const ScanLimits& lim = {});

// Grid derivatives D_t^{j0} D_x^{j} u by finite differences.
GridFunction grid_derivative(const GridFunction& u, int t_order, int x_order);

struct HolderReport {
    int k = 0;
    double alpha = 0.0;
    double sup_norm = 0.0;        // |u|
    double derivative_sum = 0.0;  // sum of |D_t^j0 D_x^j u| over 2 j0 + j <= k
    double semi_x = 0.0;          // x-quotient parts of the top-order seminorm
    double semi_t = 0.0;          // t-quotient parts (exponents alpha/2 and (1+alpha)/2)
    double parabolic_semi = 0.0;  // semi_x + semi_t
    double norm = 0.0;            // derivative_sum + parabolic_semi
    std::size_t stride_t = 1;
    std::size_t stride_x = 1;
};

HolderReport parabolic_norm(const GridFunction& u, int k, double alpha, const ScanLimits& lim = {});

struct InterpolationRatios {
    // (|u_t| + |u_xx|), <u_x>^(a/2,a) and <u>^(a/2,a), each divided by
    // U_{2+a}^theta U_0^{1-theta} for theta = 1/(2+a), (1+a)/(2+a), a/(2+a).
    std::array<double, 3> ratios{};
    double u0 = 0.0;    // |u|
    double u2a = 0.0;   // parabolic seminorm of order 2 + alpha
};

InterpolationRatios interpolation_diagnostic(const GridFunction& u, double alpha,
                                             const ScanLimits& lim = {});

}  // namespace dynbc
