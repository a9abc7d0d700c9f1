#pragma once

#include <limits>
#include <optional>

#include "dynbc/certificate.hpp"
#include "dynbc/solver.hpp"

namespace dynbc {

struct Witness {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct VerifyOptions {
    std::size_t max_time_slices = 128;
    unsigned threads = 1;
};

struct DoublingResult {
    // max of e^{-t}(u(t,x) - u(t,y) - h(x-y)) and of the mirrored
    // e^{-t}(u(t,y) - u(t,x) - h(x-y)) over grid triples 0 < x - y <= kappa0.
    double max_w_tilde = -std::numeric_limits<double>::infinity();
    double max_w1_tilde = -std::numeric_limits<double>::infinity();
    Witness w_witness;
    Witness w1_witness;
    double diagonal_max = 0.0;  // same quantity at x = y, exactly 0
    // min over the same pairs of h(x-y) - |u(t,x) - u(t,y)|
    double modulus_slack = std::numeric_limits<double>::infinity();
    Witness modulus_witness;
    bool covers_corner = false;  // the pair (ell, -ell) was inside the scan
    double max_offset = 0.0;     // largest x - y scanned
    std::size_t slices_scanned = 0;
    std::size_t pairs_per_slice = 0;
};

// Throws PreconditionFailed unless the run completed, CertificateMismatch
// when cert.M < sup|u|.
DoublingResult doubling_check(const Solution& sol, const BarrierCertificate& cert,
                              const VerifyOptions& opt = {});

struct VerificationReport {
    DoublingResult doubling;
    double gradient_slack = 0.0;  // q1 - max |u_x|
    Witness gradient_witness;     // y unused
    std::optional<double> sup_slack;        // M_proof - sup|u|
    std::optional<double> sup_slack_paper;  // M_paper - sup|u|
    Witness sup_witness;
    double sup_u = 0.0;
    double dx = 0.0;
    double dt = 0.0;          // largest time step
    double tolerance = 0.0;   // slack tolerance the pass/fail uses
    double q1 = 0.0;
    double kappa0 = 0.0;

    // All slacks within tolerance. The printed (no time factor) sup bound
    // is reported but does not decide.
    bool passed() const;
};

// 5 (dx + dt)(1 + q1)
double default_tolerance(const Solution& sol, double q1);

// tolerance <= 0 selects default_tolerance.
VerificationReport bounds_check(const Solution& sol, const BarrierCertificate& cert,
                                const SupBoundCertificate* sup_cert = nullptr, double tolerance = 0.0,
                                const VerifyOptions& opt = {});

struct BlowupCheck {
    double lhs = 0.0;  // half the integral of rho/psi over [0, inf)
    double rhs = 0.0;  // max |u| up to detection
    bool consistent = false;
    double detection_time = 0.0;
    double max_gradient = 0.0;
};

// Throws PreconditionFailed unless a blow-up was detected, DivergentIntegral
// when the integral diverges.
BlowupCheck blowup_inequality(const Solution& sol, const PsiSpec& psi, double tol = 0.0);

}  // namespace dynbc
