#pragma once

#include <functional>
#include <span>
#include <vector>

namespace dynbc::numerics {

using ScalarFn = std::function<double(double)>;

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_depth = 48;
};

// Adaptive Simpson with Richardson correction. The interval is first split
// into 16 panels so the relative tolerance is measured against a
// reasonable estimate of the integral.
double adaptive_simpson(const ScalarFn& f, double a, double b, const QuadratureOptions& opt = {});

// Brent's method on a sign-changing bracket. Stops when |f| <= f_tol or the
// bracket is narrower than x_tol. Throws std::invalid_argument when
// f(a), f(b) do not bracket a root.
double brent_root(const ScalarFn& f, double a, double b, double f_tol, double x_tol = 0.0,
                  int max_iter = 300);

// Golden-section minimization of a unimodal function on [a, b].
double golden_section_min(const ScalarFn& f, double a, double b, double x_tol, int max_iter = 200);

struct ImproperIntegral {
    bool converges = false;
    double value = 0.0;        // partial integral (+ extrapolated tail when converging)
    double last_limit = 0.0;   // largest upper limit actually integrated to
    int doublings = 0;
};

struct ProbeOptions {
    int min_doublings = 10;
    int max_doublings = 44;
    int ratio_window = 6;       // consecutive increment ratios that must decay
    double ratio_bound = 0.8;   // per-doubling decay factor treated as convergent
    double tail_rel_tol = 1e-13;
};

// Heuristic test of whether the integral of f over [lower, inf) is finite.
// Upper limits double: lower + s*2^k with s = max(lower, 1). Convergence is
// declared when the integrals over successive doubling shells shrink by a
// factor <= ratio_bound over a full window; the tail is then extrapolated
// geometrically. Anything else is reported as divergent.
ImproperIntegral probe_improper_integral(const ScalarFn& f, double lower,
                                         const ProbeOptions& opt = {},
                                         const QuadratureOptions& quad = {});

// Fornberg's finite-difference weights: sum_i w[i] f(nodes[i]) approximates
// the derivative of the given order at x0.
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order);

// Derivative of the given order (1 or 2) of samples y on nodes x at every
// node: 3-point centered stencils in the interior, one-sided second-order
// stencils (3 points for order 1, 4 points for order 2) at the ends.
std::vector<double> differentiate(std::span<const double> x, std::span<const double> y, int order);

// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson).
// Initial slopes may be supplied; they are limited so the interpolant is
// monotone on every interval where the data are.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes = {});

    // Outside [x.front(), x.back()] the end value is extended linearly with
    // the end slope.
    double operator()(double xq) const;
    double derivative(double xq) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::size_t interval(double xq) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

// Thomas algorithm. lower[0] and upper[n-1] are ignored. Throws
// std::runtime_error on a zero pivot.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<const double> rhs,
                       std::span<double> out);

}  // namespace dynbc::numerics
