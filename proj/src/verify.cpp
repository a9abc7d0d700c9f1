#include "dynbc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "dynbc/errors.hpp"

namespace dynbc {

namespace {

void require_completed(const Solution& sol, const char* what) {
    if (sol.status != SolveStatus::completed) {
        throw PreconditionFailed(std::string(what) + " needs a completed run, got " +
                                 std::string(to_string(sol.status)));
    }
}

struct SliceResult {
    double w = -std::numeric_limits<double>::infinity();
    double w1 = -std::numeric_limits<double>::infinity();
    double mod = std::numeric_limits<double>::infinity();
    Witness ww, ww1, wm;
};

}  // namespace

DoublingResult doubling_check(const Solution& sol, const BarrierCertificate& cert,
                              const VerifyOptions& opt) {
    require_completed(sol, "doubling check");
    const auto& u = sol.u;
    const double sup = sup_norm(u);
    if (cert.M < sup) {
        throw CertificateMismatch("certificate budget M = " + std::to_string(cert.M) +
                                  " is below sup|u| = " + std::to_string(sup));
    }
    const auto& x = u.nodes();
    const auto& t = u.times();
    const std::size_t nx = x.size();
    const auto h = cert.interpolant();
    const double reach = cert.kappa0 * (1.0 + 1e-12);

    // Pairs (j, k) with x_j > x_k and offset <= kappa0; h is shared by all slices.
    struct Pair {
        std::size_t j, k;
        double h;
    };
    std::vector<Pair> pairs;
    DoublingResult r;
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            const double d = x[j] - x[k];
            if (d > reach) continue;
            pairs.push_back({j, k, h(d)});
            r.max_offset = std::max(r.max_offset, d);
            if (j == nx - 1 && k == 0) r.covers_corner = true;
        }
    }
    r.pairs_per_slice = pairs.size();

    const auto slices = subsample_indices(u.nt(), opt.max_time_slices);
    r.slices_scanned = slices.size();
    std::vector<SliceResult> res(slices.size());
    const auto scan = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            const std::size_t i = slices[s];
            const double* row = u.row(i);
            const double e = std::exp(-t[i]);
            SliceResult& out = res[s];
            for (const auto& p : pairs) {
                const double du = row[p.j] - row[p.k];
                const double w = e * (du - p.h);
                const double w1 = e * (-du - p.h);
                const double m = p.h - std::abs(du);
                if (w > out.w) {
                    out.w = w;
                    out.ww = {t[i], x[p.j], x[p.k]};
                }
                if (w1 > out.w1) {
                    out.w1 = w1;
                    out.ww1 = {t[i], x[p.j], x[p.k]};
                }
                if (m < out.mod) {
                    out.mod = m;
                    out.wm = {t[i], x[p.j], x[p.k]};
                }
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, slices.size()));
    if (threads == 1) {
        scan(0, slices.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (slices.size() + threads - 1) / threads;
        for (unsigned k = 0; k < threads; ++k) {
            const std::size_t lo = k * chunk;
            const std::size_t hi = std::min(slices.size(), lo + chunk);
            if (lo < hi) pool.emplace_back(scan, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& s : res) {
        if (s.w > r.max_w_tilde) {
            r.max_w_tilde = s.w;
            r.w_witness = s.ww;
        }
        if (s.w1 > r.max_w1_tilde) {
            r.max_w1_tilde = s.w1;
            r.w1_witness = s.ww1;
        }
        if (s.mod < r.modulus_slack) {
            r.modulus_slack = s.mod;
            r.modulus_witness = s.wm;
        }
    }
    // x = y: u - u - h(0) with h(0) = 0 from the table.
    const double h0 = h(0.0);
    for (auto i : slices) r.diagonal_max = std::max(r.diagonal_max, std::exp(-t[i]) * -h0);
    return r;
}

double default_tolerance(const Solution& sol, double q1) {
    const auto& x = sol.u.nodes();
    const auto& t = sol.u.times();
    const double dx = x.size() > 1 ? x[1] - x[0] : 0.0;
    double dt = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) dt = std::max(dt, t[i] - t[i - 1]);
    return 5.0 * (dx + dt) * (1.0 + q1);
}

bool VerificationReport::passed() const {
    const double tol = tolerance;
    bool ok = doubling.max_w_tilde <= tol && doubling.max_w1_tilde <= tol &&
              gradient_slack >= -tol && doubling.modulus_slack >= -tol;
    if (sup_slack) ok = ok && *sup_slack >= -tol;
    return ok;
}

VerificationReport bounds_check(const Solution& sol, const BarrierCertificate& cert,
                                const SupBoundCertificate* sup_cert, double tolerance,
                                const VerifyOptions& opt) {
    require_completed(sol, "bounds check");
    VerificationReport r;
    r.doubling = doubling_check(sol, cert, opt);
    r.q1 = cert.q1;
    r.kappa0 = cert.kappa0;
    const auto& x = sol.u.nodes();
    const auto& t = sol.u.times();
    r.dx = x.size() > 1 ? x[1] - x[0] : 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) r.dt = std::max(r.dt, t[i] - t[i - 1]);
    r.tolerance = tolerance > 0.0 ? tolerance : default_tolerance(sol, cert.q1);

    double gmax = -1.0;
    double umax = -1.0;
    for (std::size_t i = 0; i < sol.u.nt(); ++i) {
        for (std::size_t j = 0; j < sol.u.nx(); ++j) {
            const double g = std::abs(sol.ux(i, j));
            if (g > gmax) {
                gmax = g;
                r.gradient_witness = {t[i], x[j], 0.0};
            }
            const double v = std::abs(sol.u(i, j));
            if (v > umax) {
                umax = v;
                r.sup_witness = {t[i], x[j], 0.0};
            }
        }
    }
    r.gradient_slack = cert.q1 - gmax;
    r.sup_u = umax;
    if (sup_cert) {
        r.sup_slack = sup_cert->M_proof - umax;
        r.sup_slack_paper = sup_cert->M_paper - umax;
    }
    return r;
}

BlowupCheck blowup_inequality(const Solution& sol, const PsiSpec& psi, double tol) {
    if (sol.status != SolveStatus::blowup_detected) {
        throw PreconditionFailed("blow-up inequality needs a run that detected blow-up, got " +
                                 std::string(to_string(sol.status)));
    }
    const auto probe = probe_growth_integral(psi, 0.0);
    if (!probe.converges) {
        throw DivergentIntegral(
            "integral of rho/psi diverges: a bounded solution cannot lose its gradient bound");
    }
    BlowupCheck b;
    b.lhs = 0.5 * probe.value;
    b.rhs = sup_norm(sol.u);
    b.consistent = b.lhs <= b.rhs + tol;
    b.detection_time = sol.status_time;
    b.max_gradient = sol.max_gradient;
    return b;
}

}  // namespace dynbc
