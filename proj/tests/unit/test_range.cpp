#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "crt/cone.hpp"
#include "crt/dalembertian.hpp"
#include "crt/error.hpp"
#include "crt/phantoms.hpp"
#include "crt/range.hpp"
#include "helpers.hpp"

using namespace crt;
using crt::test::box_grid;
using std::numbers::pi;

namespace {

const ConeParams kRight = ConeParams::right_angle();

struct EvenCase {
    GridSpec grid;
    PhantomSpec spec;
    ScalarField f;
    ScalarField g;
};

EvenCase even_case(std::size_t n, const ConeParams& cone = kRight) {
    auto grid = box_grid(1, n, 2.0, n, -2.0, 2.0);
    auto spec = PhantomSpec::single(PhantomKind::bump, {0.0, -0.5}, 1.0);
    auto f = render_phantom(spec, grid);
    auto g = forward_crt(f, cone);
    return {grid, spec, f, g};
}

ScalarField odd_forward(const GridSpec& grid) {
    const auto f = render_phantom(PhantomSpec::single(PhantomKind::bump, {0.0, 0.0, -0.1}, 1.0), grid);
    return forward_crt(f, kRight);
}

}  // namespace

TEST_CASE("dimension bookkeeping") {
    CHECK(parity_for(1) == Parity::even);
    CHECK(parity_for(2) == Parity::odd);
    CHECK(parity_for(3) == Parity::even);
    CHECK(order_for(1) == 1);
    CHECK(order_for(2) == 1);
    CHECK(order_for(3) == 2);
    CHECK(std::string(to_string(Parity::odd)) == "odd");
}

TEST_CASE("identity constants") {
    CHECK(even_constant(1, kRight) == doctest::Approx(2.0));
    CHECK(even_constant(2, kRight) == doctest::Approx(8.0 * pi));
    CHECK(even_constant(1, ConeParams(pi / 3)) == doctest::Approx(2.0 * std::sqrt(3.0)));
    CHECK(odd_constant(1, kRight) == doctest::Approx(2.0 * std::sqrt(2.0) * pi * pi));
    CHECK_THROWS_AS(even_constant(0, kRight), DomainError);
}

TEST_CASE("inversion of zero data") {
    const ScalarField z1(box_grid(1, 16, 1.0, 16, 0.0, 2.0));
    CHECK(linf_norm(invert_even(z1, kRight, 1)) == 0.0);
    const ScalarField z2(box_grid(2, 10, 1.0, 12, 0.0, 2.0));
    CHECK(linf_norm(invert_odd(z2, kRight, 1)) == 0.0);
    CHECK(linf_norm(fundamental_solution_apply(z1, kRight, Parity::even, 1)) == 0.0);
}

TEST_CASE("dimension mismatch is rejected") {
    const ScalarField z2(box_grid(2, 10, 1.0, 12, 0.0, 2.0));
    CHECK_THROWS_AS(invert_even(z2, kRight, 1), DomainError);
    const ScalarField z1(box_grid(1, 16, 1.0, 16, 0.0, 2.0));
    CHECK_THROWS_AS(invert_odd(z1, kRight, 1), DomainError);
}

TEST_CASE("even necessity identity holds exactly on the matched lattice") {
    // with equal spacings on the right-angle cone the discrete identity has no truncation term
    const auto c = even_case(129);
    const auto lhs = apply_box(c.g, kRight, 1);
    const auto rhs = scale(partial_t(c.f), 2.0);
    CHECK(relative_l2_error(lhs, rhs, interior_box(c.grid, 1)) < 1e-10);
}

TEST_CASE("even necessity identity against the analytic derivative") {
    const auto err = [](std::size_t n) {
        const auto c = even_case(n);
        const auto lhs = apply_box(c.g, kRight, 1);
        const auto rhs = scale(render_phantom_dt(c.spec, c.grid), 2.0);
        return relative_l2_error(lhs, rhs, interior_box(c.grid, 4));
    };
    const double coarse = err(65);
    const double fine = err(129);
    CHECK(coarse < 0.1);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("even roundtrip") {
    const auto c = even_case(129);
    const auto back = invert_even(c.g, kRight, 1);
    CHECK(relative_l2_error(back, c.f, full_box(c.grid)) < 0.02);
}

TEST_CASE("calibration reproduces the closed-form constant") {
    SUBCASE("even, right angle") {
        const auto c = even_case(129);
        const auto cal = calibrate(c.f, render_phantom_dt(c.spec, c.grid), kRight, Parity::even, 1, 4);
        CHECK(cal.closed_form == doctest::Approx(2.0));
        CHECK(cal.relative_difference < 0.01);
    }
    SUBCASE("even, wider cone") {
        const ConeParams cone(pi / 3);
        const auto c = even_case(129, cone);
        const auto cal = calibrate(c.f, render_phantom_dt(c.spec, c.grid), cone, Parity::even, 1, 4);
        CHECK(cal.closed_form == doctest::Approx(2.0 * std::sqrt(3.0)));
        CHECK(cal.relative_difference < 0.01);
    }
    SUBCASE("odd, right angle") {
        const auto grid = box_grid(2, 48, 1.7, 64, -1.15, 1.3);
        const auto spec = PhantomSpec::single(PhantomKind::bump, {0.0, 0.0, -0.1}, 1.0);
        const auto f = render_phantom(spec, grid);
        const auto cal = calibrate(f, render_phantom_dt(spec, grid), kRight, Parity::odd, 1, 6);
        CHECK(cal.closed_form == doctest::Approx(2.0 * std::sqrt(2.0) * pi * pi));
        CHECK(cal.relative_difference < 0.05);
    }
}

TEST_CASE("condition two on forward data") {
    const auto c = even_case(129);
    // boundary cells use one-sided stencils on windowed data, so integrate the interior only
    const auto filtered = apply_box(c.g, kRight, 1);
    const auto box = interior_box(c.grid, 1);
    std::vector<double> kept(c.grid.size(), 0.0);
    std::vector<double> magnitude(c.grid.size(), 0.0);
    const std::size_t nt = c.grid.t_count();
    for (std::size_t i = box.lo[0]; i <= box.hi[0]; ++i) {
        for (std::size_t n = box.lo[1]; n <= box.hi[1]; ++n) {
            kept[i * nt + n] = filtered[i * nt + n];
            magnitude[i * nt + n] = std::abs(filtered[i * nt + n]);
        }
    }
    const double integral = total_t_integral(ScalarField(c.grid, kept)).max_abs();
    const double scale_l1 = total_t_integral(ScalarField(c.grid, magnitude)).max_abs();
    const double h = c.grid.max_spacing();
    CHECK(integral <= 10.0 * h * h * scale_l1);
}

TEST_CASE("fundamental solution") {
    const auto grid = box_grid(1, 129, 2.0, 129, -2.0, 2.0);
    const auto f = render_phantom(PhantomSpec::single(PhantomKind::bump, {0.0, -0.5}, 1.0), grid);
    const auto phi_f = fundamental_solution_apply(f, kRight, Parity::even, 1);
    const auto back = apply_box(phi_f, kRight, 1);
    const double h = grid.max_spacing();
    CHECK(relative_l2_error(back, f, interior_box(grid, 1)) <= 10.0 * h * h);
    // bound of the form max|f| Vol(supp f) with a loose constant
    const double volume = pi;
    CHECK(linf_norm(phi_f) <= 10.0 / 2.0 * linf_norm(f) * volume * 4.0);
}

TEST_CASE("range check on even data") {
    const auto c = even_case(129);
    const auto tol = RangeTolerances::defaults_for(c.grid);
    const double h = c.grid.max_spacing();
    CHECK(tol.support == doctest::Approx(std::max(10.0 * h * h, 1e-6)));

    SUBCASE("forward data passes") {
        const auto report = check_range(c.g, kRight, Parity::even, 1, tol);
        CHECK(report.cond1_pass);
        CHECK(report.cond2_pass);
        CHECK(report.cond3_pass);
        CHECK(report.all_pass());
        CHECK(report.cond1_residual <= tol.support);
    }
    SUBCASE("zero data passes with the vacuous half-space") {
        const auto report = check_range(ScalarField(c.grid), kRight, Parity::even, 1, tol);
        CHECK(report.all_pass());
        REQUIRE(report.cond3_t0.has_value());
        CHECK(*report.cond3_t0 == c.grid.t_max());
        CHECK_FALSE(report.filtered_support.has_value());
    }
    SUBCASE("an added bump is not in the range") {
        const auto bump = render_phantom(PhantomSpec::single(PhantomKind::bump, {0.3, 0.5}, 0.4), c.grid);
        const auto perturbed = add(c.g, scale(bump, 0.1 * linf_norm(c.g)));
        const auto report = check_range(perturbed, kRight, Parity::even, 1, tol);
        CHECK_FALSE(report.all_pass());
        CHECK(std::max(report.cond1_residual / tol.support, report.cond2_residual / tol.integral) >= 10.0);
    }
    SUBCASE("data reaching the bottom slab fails condition three") {
        const double level = 0.1 * linf_norm(c.g);
        const auto dirty = add(c.g, sample(c.grid, [level](auto) { return level; }));
        const auto report = check_range(dirty, kRight, Parity::even, 1, tol);
        CHECK_FALSE(report.cond3_pass);
        CHECK_FALSE(report.cond3_t0.has_value());
    }
    SUBCASE("reports are deterministic and serialize") {
        const auto a = check_range(c.g, kRight, Parity::even, 1, tol);
        const auto b = check_range(c.g, kRight, Parity::even, 1, tol);
        CHECK(a.to_kv() == b.to_kv());
        const auto kv = a.to_kv();
        for (const char* key : {"parity=even", "k=1", "phi=", "cond1_residual=", "cond2_residual=", "cond3_t0=",
                                "cond1_pass=true", "cond2_pass=true", "cond3_pass=true", "tol="}) {
            CHECK(kv.find(key) != std::string::npos);
        }
        CHECK(a.to_text().find("PASS") != std::string::npos);
    }
}

TEST_CASE("range check on odd data") {
    const auto grid = box_grid(2, 48, 2.0, 64, -2.0, 2.0);
    const auto g = odd_forward(grid);
    const auto tol = RangeTolerances::defaults_for(grid);
    const auto report = check_range(g, kRight, Parity::odd, 1, tol);
    CHECK(report.parity == Parity::odd);
    CHECK(report.cond1_pass);
    CHECK(report.cond2_pass);
    CHECK(report.cond3_pass);
    // cells whose C' cone leaves the window are excluded
    CHECK(report.trusted_fraction > 0.2);
    CHECK(report.trusted_fraction < 0.6);
}

TEST_CASE("range check needs room for its stencils") {
    const ScalarField z(box_grid(1, 6, 1.0, 6, 0.0, 1.0));
    CHECK_THROWS_AS(check_range(z, kRight, Parity::even, 1, RangeTolerances::defaults_for(z.grid())), DomainError);
}
