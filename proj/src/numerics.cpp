#include "dynbc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dynbc::numerics {

namespace {

double simpson_recurse(const ScalarFn& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol || !std::isfinite(delta)) {
        return left + right + delta / 15.0;
    }
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const ScalarFn& f, double a, double b, const QuadratureOptions& opt) {
    if (a == b) return 0.0;
    constexpr int kPanels = 16;
    const double h = (b - a) / kPanels;
    std::vector<double> fx(2 * kPanels + 1);
    for (int i = 0; i <= 2 * kPanels; ++i) fx[i] = f(a + 0.5 * h * i);

    std::vector<double> panel(kPanels);
    double estimate = 0.0;
    for (int k = 0; k < kPanels; ++k) {
        panel[k] = h / 6.0 * (fx[2 * k] + 4.0 * fx[2 * k + 1] + fx[2 * k + 2]);
        estimate += panel[k];
    }
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(estimate)) / kPanels;
    double total = 0.0;
    for (int k = 0; k < kPanels; ++k) {
        const double lo = a + h * k;
        total += simpson_recurse(f, lo, lo + h, fx[2 * k], fx[2 * k + 1], fx[2 * k + 2], panel[k],
                                 tol, opt.max_depth);
    }
    return total;
}

double brent_root(const ScalarFn& f, double a, double b, double f_tol, double x_tol,
                  int max_iter) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw std::invalid_argument("brent_root: root not bracketed");

    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(fb) <= f_tol || std::abs(xm) <= tol1) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p = 0.0;
            double q = 0.0;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
        fb = f(b);
    }
    return b;
}

double golden_section_min(const ScalarFn& f, double a, double b, double x_tol, int max_iter) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < max_iter && std::abs(b - a) > x_tol; ++i) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

ImproperIntegral probe_improper_integral(const ScalarFn& f, double lower, const ProbeOptions& opt,
                                         const QuadratureOptions& quad) {
    const double scale = std::max(std::abs(lower), 1.0);
    ImproperIntegral out;
    double limit = lower + scale;
    double total = adaptive_simpson(f, lower, limit, quad);
    std::vector<double> shells;
    for (int k = 1; k <= opt.max_doublings; ++k) {
        const double next = lower + scale * std::ldexp(1.0, k);
        const double shell = adaptive_simpson(f, limit, next, quad);
        shells.push_back(shell);
        total += shell;
        limit = next;
        out.doublings = k;
        if (!std::isfinite(total)) break;

        if (k < opt.min_doublings || static_cast<int>(shells.size()) <= opt.ratio_window) continue;
        bool decaying = true;
        double ratio = 0.0;
        for (int j = 0; j < opt.ratio_window; ++j) {
            const double cur = shells[shells.size() - 1 - j];
            const double prev = shells[shells.size() - 2 - j];
            const double r = prev == 0.0 ? (cur == 0.0 ? 0.0 : 1.0) : cur / prev;
            if (!(r >= 0.0 && r <= opt.ratio_bound)) {
                decaying = false;
                break;
            }
            if (j == 0) ratio = r;
        }
        if (!decaying) continue;
        const double tail = shells.back() * ratio / (1.0 - ratio);
        if (std::abs(tail) <= opt.tail_rel_tol * std::max(std::abs(total), 1e-300) ||
            k == opt.max_doublings) {
            out.converges = true;
            out.value = total + tail;
            out.last_limit = limit;
            return out;
        }
    }
    // Ran out of doublings: convergent only if the shells still decay
    // geometrically at the end.
    out.value = total;
    out.last_limit = limit;
    if (static_cast<int>(shells.size()) > opt.ratio_window && std::isfinite(total)) {
        bool decaying = true;
        for (int j = 0; j < opt.ratio_window; ++j) {
            const double cur = shells[shells.size() - 1 - j];
            const double prev = shells[shells.size() - 2 - j];
            const double r = prev == 0.0 ? (cur == 0.0 ? 0.0 : 1.0) : cur / prev;
            if (!(r >= 0.0 && r <= opt.ratio_bound)) decaying = false;
        }
        if (decaying) {
            const double cur = shells.back();
            const double prev = shells[shells.size() - 2];
            const double r = prev == 0.0 ? 0.0 : cur / prev;
            out.converges = true;
            out.value = total + cur * r / (1.0 - r);
        }
    }
    return out;
}

std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order) {
    const int n = static_cast<int>(nodes.size());
    // c[i][k]: weight of node i for derivative k (Fornberg 1988).
    std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][order];
    return w;
}

std::vector<double> differentiate(std::span<const double> x, std::span<const double> y, int order) {
    const std::size_t n = x.size();
    if (order < 1 || order > 2) throw std::invalid_argument("differentiate: order must be 1 or 2");
    if (n < 3) throw std::invalid_argument("differentiate: need at least 3 points");
    std::vector<double> out(n);
    auto apply = [&](std::size_t at, std::size_t first, std::size_t count) {
        const auto w = fd_weights(x[at], x.subspan(first, count), order);
        double s = 0.0;
        for (std::size_t k = 0; k < count; ++k) s += w[k] * y[first + k];
        out[at] = s;
    };
    const std::size_t edge = (order == 2 && n >= 4) ? 4 : 3;
    apply(0, 0, edge);
    for (std::size_t i = 1; i + 1 < n; ++i) apply(i, i - 1, 3);
    apply(n - 1, n - edge, edge);
    return out;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y,
                             std::vector<double> slopes)
    : x_(std::move(x)), y_(std::move(y)), m_(std::move(slopes)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: bad table");
    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = x_[k + 1] - x_[k];
        if (!(h > 0.0)) throw std::invalid_argument("MonotoneCubic: abscissae not increasing");
        delta[k] = (y_[k + 1] - y_[k]) / h;
    }
    if (m_.size() != n) {
        m_.assign(n, 0.0);
        m_[0] = delta[0];
        m_[n - 1] = delta[n - 2];
        for (std::size_t k = 1; k + 1 < n; ++k) {
            m_[k] = (delta[k - 1] * delta[k] <= 0.0) ? 0.0 : 0.5 * (delta[k - 1] + delta[k]);
        }
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (delta[k] == 0.0) {
            m_[k] = 0.0;
            m_[k + 1] = 0.0;
            continue;
        }
        double a = m_[k] / delta[k];
        double b = m_[k + 1] / delta[k];
        if (a < 0.0) {
            m_[k] = 0.0;
            a = 0.0;
        }
        if (b < 0.0) {
            m_[k + 1] = 0.0;
            b = 0.0;
        }
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m_[k] = tau * a * delta[k];
            m_[k + 1] = tau * b * delta[k];
        }
    }
}

std::size_t MonotoneCubic::interval(double xq) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    const std::size_t idx = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(idx, x_.size() - 2);
}

double MonotoneCubic::operator()(double xq) const {
    if (xq <= x_.front()) return y_.front() + m_.front() * (xq - x_.front());
    if (xq >= x_.back()) return y_.back() + m_.back() * (xq - x_.back());
    const std::size_t k = interval(xq);
    const double h = x_[k + 1] - x_[k];
    const double s = (xq - x_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
}

double MonotoneCubic::derivative(double xq) const {
    if (xq <= x_.front()) return m_.front();
    if (xq >= x_.back()) return m_.back();
    const std::size_t k = interval(xq);
    const double h = x_[k + 1] - x_[k];
    const double s = (xq - x_[k]) / h;
    const double s2 = s * s;
    const double d00 = (6.0 * s2 - 6.0 * s) / h;
    const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
    const double d01 = (-6.0 * s2 + 6.0 * s) / h;
    const double d11 = 3.0 * s2 - 2.0 * s;
    return d00 * y_[k] + d10 * m_[k] + d01 * y_[k + 1] + d11 * m_[k + 1];
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<const double> rhs,
                       std::span<double> out) {
    const std::size_t n = diag.size();
    std::vector<double> c(n);
    std::vector<double> d(n);
    double beta = diag[0];
    if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    c[0] = n > 1 ? upper[0] / beta : 0.0;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        beta = diag[i] - lower[i] * c[i - 1];
        if (beta == 0.0 || !std::isfinite(beta)) {
            throw std::runtime_error("solve_tridiagonal: zero pivot");
        }
        c[i] = i + 1 < n ? upper[i] / beta : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    out[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) out[i] = d[i] - c[i] * out[i + 1];
}

}  // namespace dynbc::numerics
