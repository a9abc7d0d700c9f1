#include <cmath>
#include <random>

#include "doctest.h"
#include "dynbc/errors.hpp"
#include "dynbc/holder.hpp"

using namespace dynbc;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

GridFunction random_grid(std::mt19937_64& rng, int nt, int nx) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> vals(static_cast<std::size_t>(nt * nx));
    for (auto& v : vals) v = u(rng);
    return GridFunction(linspace(0, 1, nt), linspace(-1, 1, nx), std::move(vals));
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(GridFunction({0.0, 0.0}, {0.0, 1.0}, {1, 2, 3, 4}), InvalidGrid);
    CHECK_THROWS_AS(GridFunction({0.0, 1.0}, {0.0, 1.0}, {1, 2, 3}), InvalidGrid);
    CHECK_THROWS_AS(GridFunction({0.0}, {0.0}, {NAN}), InvalidGrid);
}

TEST_CASE("sup norm") {
    CHECK(sup_norm(GridFunction::sample(linspace(0, 1, 5), linspace(-1, 1, 7),
                                        [](double, double) { return -3.0; })) == 3.0);
    CHECK(sup_norm(GridFunction::sample(linspace(0, 1, 5), linspace(-1, 1, 7),
                                        [](double, double x) { return x; })) == 1.0);
    CHECK(sup_norm(GridFunction::sample(linspace(0, 1, 11), linspace(-1, 1, 21), [](double t, double x) {
              return std::exp(-t) * std::cos(x);
          })) == 1.0);
}

TEST_CASE("Hoelder seminorm examples") {
    const auto ident = GridFunction::sample(linspace(0, 1, 3), linspace(-1, 1, 9),
                                            [](double, double x) { return x; });
    CHECK(holder_seminorm(ident, 1.0, Axis::x) == doctest::Approx(1.0));
    const auto c = GridFunction::sample(linspace(0, 1, 3), linspace(-1, 1, 9),
                                        [](double, double) { return 4.0; });
    CHECK(holder_seminorm(c, 0.3, Axis::x) == 0.0);
    CHECK(holder_seminorm(c, 0.3, Axis::t) == 0.0);
    const auto root = GridFunction::sample({0.0}, {-1.0, -0.5, 0.0, 0.5, 1.0},
                                           [](double, double x) { return std::sqrt(std::abs(x)); });
    // Brute force over the 10 pairs.
    const std::vector<double> xs{-1.0, -0.5, 0.0, 0.5, 1.0};
    double best = 0.0;
    for (std::size_t a = 0; a < xs.size(); ++a)
        for (std::size_t b = a + 1; b < xs.size(); ++b)
            best = std::max(best, std::abs(std::sqrt(std::abs(xs[b])) - std::sqrt(std::abs(xs[a]))) /
                                      std::pow(xs[b] - xs[a], 0.5));
    CHECK(best == doctest::Approx(1.0));
    CHECK(holder_seminorm(root, 0.5, Axis::x) == doctest::Approx(best));
    CHECK_THROWS_AS(holder_seminorm(root, 0.5, Axis::t), DegenerateGrid);
    CHECK_THROWS_AS(holder_seminorm(root, 0.0, Axis::x), PreconditionFailed);
    CHECK_THROWS_AS(holder_seminorm(root, 1.5, Axis::x), PreconditionFailed);
}

TEST_CASE("parabolic norm examples") {
    const auto zero = GridFunction::sample(linspace(0, 1, 5), linspace(-1, 1, 5),
                                           [](double, double) { return 0.0; });
    for (int k = 0; k <= 2; ++k) {
        const auto r = parabolic_norm(zero, k, 0.5);
        CHECK(r.norm == 0.0);
        CHECK(r.parabolic_semi == 0.0);
    }
    const auto ident = GridFunction::sample(linspace(0, 1, 5), linspace(-1, 1, 9),
                                            [](double, double x) { return x; });
    const auto r0 = parabolic_norm(ident, 0, 0.5);
    CHECK(r0.sup_norm == 1.0);
    CHECK(r0.semi_x == doctest::Approx(std::sqrt(2.0)));
    CHECK(r0.semi_t == 0.0);

    const auto tiny = GridFunction::sample(linspace(0, 1, 2), linspace(-1, 1, 9),
                                           [](double, double x) { return x; });
    CHECK_THROWS_AS(parabolic_norm(tiny, 1, 0.5), DegenerateGrid);
    CHECK_NOTHROW(parabolic_norm(tiny, 0, 0.5));
}

TEST_CASE("order-2 norm of a smooth function tracks analytic derivatives") {
    const auto u = GridFunction::sample(linspace(0, 1, 129), linspace(-1, 1, 129),
                                        [](double t, double x) { return std::exp(-t) * std::cos(x); });
    const auto r = parabolic_norm(u, 2, 0.5);
    // |u| + |u_x| + |u_xx| + |u_t| = 1 + sin(1) + 1 + 1
    CHECK(r.derivative_sum == doctest::Approx(3.0 + std::sin(1.0)).epsilon(1e-2));
    CHECK(std::isfinite(r.norm));
    CHECK(r.semi_x > 0.0);
    CHECK(r.semi_t > 0.0);
}

TEST_CASE("homogeneity and triangle inequality on random grids") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> lam(-5.0, 5.0);
    std::uniform_real_distribution<double> alpha(0.05, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto u = random_grid(rng, 7, 9);
        const auto v = random_grid(rng, 7, 9);
        const double l = lam(rng);
        const double a = alpha(rng);
        CHECK(sup_norm(u.scaled(l)) == doctest::Approx(std::abs(l) * sup_norm(u)).epsilon(1e-13));
        for (Axis ax : {Axis::x, Axis::t}) {
            const double n = holder_seminorm(u, a, ax);
            CHECK(holder_seminorm(u.scaled(l), a, ax) == doctest::Approx(std::abs(l) * n).epsilon(1e-12));
            CHECK(holder_seminorm(u.plus(v), a, ax) <=
                  n + holder_seminorm(v, a, ax) + 1e-12 * (1.0 + n));
        }
        CHECK(sup_norm(u.plus(v)) <= sup_norm(u) + sup_norm(v) + 1e-15);
        for (int k = 0; k <= 2; ++k) {
            const auto ru = parabolic_norm(u, k, a);
            const auto rs = parabolic_norm(u.scaled(l), k, a);
            CHECK(rs.norm == doctest::Approx(std::abs(l) * ru.norm).epsilon(1e-12));
            const auto rv = parabolic_norm(v, k, a);
            const auto ruv = parabolic_norm(u.plus(v), k, a);
            CHECK(ruv.parabolic_semi <= ru.parabolic_semi + rv.parabolic_semi + 1e-10);
        }
    }
}

TEST_CASE("restriction never increases a seminorm") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto u = random_grid(rng, 9, 11);
        const auto sub = u.restricted({0, 2, 5, 8}, {1, 3, 4, 9, 10});
        for (Axis ax : {Axis::x, Axis::t}) {
            CHECK(holder_seminorm(sub, 0.4, ax) <= holder_seminorm(u, 0.4, ax) + 1e-15);
        }
    }
}

TEST_CASE("subsampling keeps the last index and respects the cap") {
    for (std::size_t n : {1u, 2u, 10u, 512u, 513u, 1000u, 4097u}) {
        const auto idx = subsample_indices(n, 512);
        CHECK(idx.size() <= 512);
        CHECK(idx.front() == 0);
        CHECK(idx.back() == n - 1);
    }
    const auto u = GridFunction::sample(linspace(0, 1, 3), linspace(-1, 1, 2001),
                                        [](double, double x) { return x * x; });
    const auto r = parabolic_norm(u, 0, 0.5, ScanLimits{512});
    CHECK(r.stride_x > 1);
}

TEST_CASE("interpolation ratios") {
    const auto zero = GridFunction::sample(linspace(0, 1, 9), linspace(-1, 1, 9),
                                           [](double, double) { return 0.0; });
    const auto z = interpolation_diagnostic(zero, 0.5);
    CHECK(z.ratios[0] == 0.0);
    CHECK(z.ratios[1] == 0.0);
    CHECK(z.ratios[2] == 0.0);

    const auto lin = GridFunction::sample(linspace(0, 1, 9), linspace(-1, 1, 9),
                                          [](double, double x) { return x; });
    CHECK_THROWS_AS(interpolation_diagnostic(lin, 0.5), ZeroDenominator);

    const auto heat = [](int n) {
        return GridFunction::sample(linspace(0, 1, n), linspace(-1, 1, n),
                                    [](double t, double x) { return std::exp(-t) * std::cos(x); });
    };
    const auto coarse = interpolation_diagnostic(heat(64), 0.5);
    const auto fine = interpolation_diagnostic(heat(128), 0.5);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::isfinite(coarse.ratios[i]));
        CHECK(fine.ratios[i] == doctest::Approx(coarse.ratios[i]).epsilon(0.2));
    }
}

TEST_CASE("interpolation ratios are scale invariant") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 100; ++i) {
        const auto u = random_grid(rng, 6, 8);
        const auto a = interpolation_diagnostic(u, 0.5);
        const auto b = interpolation_diagnostic(u.scaled(5.0), 0.5);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(a.ratios[k] - b.ratios[k]) <= 1e-12 * std::abs(a.ratios[k]));
        }
    }
}
