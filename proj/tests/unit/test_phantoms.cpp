#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "crt/error.hpp"
#include "crt/phantoms.hpp"
#include "helpers.hpp"

using namespace crt;
using crt::test::box_grid;
using std::numbers::pi;

TEST_CASE("bump profile") {
    const auto spec = PhantomSpec::single(PhantomKind::bump, {0.5, -0.25}, 0.5, 3.0);
    const double center[2] = {0.5, -0.25};
    CHECK(spec.value(center) == doctest::Approx(3.0));
    const double edge[2] = {1.0, -0.25};
    CHECK(spec.value(edge) == 0.0);
    const double outside[2] = {0.5, 0.5};
    CHECK(spec.value(outside) == 0.0);
    CHECK(spec.lower_bounds() == std::vector<double>{0.0, -0.75});
    CHECK(spec.upper_bounds() == std::vector<double>{1.0, 0.25});
}

TEST_CASE("gaussian profile") {
    const auto spec = PhantomSpec::single(PhantomKind::gaussian, {0.0, 0.0}, 0.1, 2.0);
    const double p[2] = {0.1, 0.0};
    CHECK(spec.value(p) == doctest::Approx(2.0 * std::exp(-0.5)));
    CHECK(spec.upper_bounds()[0] == doctest::Approx(0.8));
}

TEST_CASE("analytic t derivative matches a difference quotient") {
    PhantomSpec spec;
    spec.spatial_dim = 2;
    spec.blobs = {{{0.0, 0.1, 0.2}, {1.0, 0.8, 0.6}, 1.5}, {{0.3, -0.2, 0.0}, {0.4, 0.4, 0.4}, -0.5}};
    for (double t : {-0.3, 0.05, 0.31, 0.6}) {
        const double p[3] = {0.12, -0.07, t};
        const double d = 1e-6;
        const double up[3] = {p[0], p[1], t + d};
        const double dn[3] = {p[0], p[1], t - d};
        CHECK(spec.value_dt(p) == doctest::Approx((spec.value(up) - spec.value(dn)) / (2 * d)).epsilon(1e-6));
    }
}

TEST_CASE("grid integral of the unit bump") {
    // pi e (1/e - E1(1)) with E1(1) the exponential integral
    const double exact = pi * std::numbers::e * (std::exp(-1.0) - 0.21938393439552027);
    const auto grid = box_grid(1, 201, 1.25, 201, -1.25, 1.25);
    const auto f = render_phantom(PhantomSpec::single(PhantomKind::bump, {0.0, 0.0}, 1.0), grid);
    double sum = 0.0;
    for (double v : f.values()) sum += v;
    sum *= grid.spacing(0) * grid.spacing(1);
    CHECK(sum == doctest::Approx(exact).epsilon(1e-3));
    CHECK(exact == doctest::Approx(1.268112).epsilon(1e-6));
}

TEST_CASE("rendering checks the fit") {
    const auto grid = box_grid(1, 21, 1.0, 21, -1.0, 1.0);
    const auto spec = PhantomSpec::single(PhantomKind::bump, {0.5, 0.0}, 0.6);
    CHECK_FALSE(fits(spec, grid));
    CHECK_THROWS_AS(render_phantom(spec, grid), DomainError);
    CHECK(fits(PhantomSpec::single(PhantomKind::bump, {0.0, 0.0}, 0.8), grid, 1));
    CHECK_FALSE(fits(PhantomSpec::single(PhantomKind::bump, {0.0, 0.0}, 0.95), grid, 1));
    CHECK_THROWS_AS(PhantomSpec::single(PhantomKind::bump, {0.0, 0.0}, -1.0).value(std::vector<double>{0, 0}),
                    DomainError);
}

TEST_CASE("adaptive simpson") {
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, pi, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-11));
    CHECK(adaptive_simpson([](double x) { return std::exp(-x * x); }, -6.0, 6.0, 1e-12) ==
          doctest::Approx(std::sqrt(pi)).epsilon(1e-11));
}

TEST_CASE("forward oracle") {
    const ConeParams cone = ConeParams::right_angle();
    SUBCASE("zero phantom") {
        const auto spec = PhantomSpec::single(PhantomKind::bump, {0.0, 0.0}, 1.0, 0.0);
        const auto v = oracle_forward_crt(spec, {{0.0, 1.0}, {0.5, 2.0}}, cone);
        CHECK(v == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("backward cone missing the support") {
        const auto spec = PhantomSpec::single(PhantomKind::bump, {0.0, 0.0, 0.0}, 0.5);
        // the lowest reach of the cone from (x, t) is t itself, below the support
        const auto v = oracle_forward_crt(spec, {{0.0, 0.0, -0.6}, {2.0, 0.0, 1.0}}, cone);
        CHECK(v[0] == 0.0);
        CHECK(v[1] == 0.0);
    }
    SUBCASE("self convergence") {
        for (int m = 1; m <= 3; ++m) {
            std::vector<double> c(static_cast<std::size_t>(m + 1), 0.0);
            const auto spec = PhantomSpec::single(PhantomKind::bump, c, 1.0);
            std::vector<std::vector<double>> pts;
            for (double t : {-0.5, 0.3, 1.2}) {
                for (double x : {0.0, 0.7}) {
                    // the triple integral is slow; two points are enough there
                    if (m == 3 && (t < 0.0 || (x == 0.0) == (t > 1.0))) continue;
                    std::vector<double> p(static_cast<std::size_t>(m + 1), 0.0);
                    p[0] = x;
                    p[m] = t;
                    pts.push_back(p);
                }
            }
            for (auto kernel : {OracleKernel::plain, OracleKernel::weighted}) {
                if (m != 2 && kernel == OracleKernel::weighted) continue;
                const auto a = oracle_forward_crt(spec, pts, cone, {1e-10, 32}, kernel);
                const auto b = oracle_forward_crt(spec, pts, cone, {1e-10, 64}, kernel);
                double peak = 0.0;
                double diff = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    peak = std::max(peak, std::abs(b[i]));
                    diff = std::max(diff, std::abs(a[i] - b[i]));
                }
                CAPTURE(m);
                CHECK(peak > 0.0);
                CHECK(diff < 1e-8 * peak);
            }
        }
    }
    SUBCASE("weighted kernel needs two spatial dimensions") {
        const auto spec = PhantomSpec::single(PhantomKind::bump, {0.0, 0.0}, 1.0);
        CHECK_THROWS_AS(oracle_forward_crt(spec, {{0.0, 1.0}}, cone, {}, OracleKernel::weighted), DomainError);
    }
    SUBCASE("one-dimensional value by hand") {
        // f = bump in t only, constant width in x much larger than the cone reach
        PhantomSpec spec;
        spec.spatial_dim = 1;
        spec.blobs = {{{0.0, 0.0}, {50.0, 0.5}, 1.0}};
        const auto v = oracle_forward_crt(spec, {{0.0, 0.2}}, cone, {1e-12, 32});
        // g(0, t) = 2 int_0^inf f(y, t - y) dy
        const double direct = 2.0 * adaptive_simpson(
                                        [&](double y) {
                                            const double p[2] = {-y, 0.2 - y};
                                            return spec.value(p);
                                        },
                                        0.0, 0.7, 1e-13);
        CHECK(v[0] == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("symbol oracle") {
    for (double w : {0.5, 2.0, 8.0}) {
        for (double tau : {0.5, 1.0, 4.0}) {
            CHECK(std::abs(oracle_symbol(w, tau, 1) - 2.0 * tau / (tau * tau + w * w)) <
                  1e-10 * 2.0 * tau / (tau * tau + w * w));
            const double m2 = 2.0 * pi * tau / std::pow(tau * tau + w * w, 1.5);
            CHECK(std::abs(oracle_symbol(w, tau, 2) - m2) < 1e-10 * m2);
        }
    }
    // zero frequency: |S^{m-1}| Gamma(m) / tau^m
    const double tau = 1.7;
    CHECK(oracle_symbol(0.0, tau, 1).real() == doctest::Approx(2.0 / tau).epsilon(1e-10));
    CHECK(oracle_symbol(0.0, tau, 2).real() == doctest::Approx(2.0 * pi / (tau * tau)).epsilon(1e-10));
    CHECK(oracle_symbol(0.0, tau, 3).real() == doctest::Approx(8.0 * pi / std::pow(tau, 3)).epsilon(1e-10));
    CHECK_THROWS_AS(oracle_symbol(1.0, 0.0, 1), DomainError);
    CHECK_THROWS_AS(oracle_symbol(1.0, 1.0, 4), DomainError);
}
