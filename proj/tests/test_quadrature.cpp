#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ergomix/instances.hpp"
#include "ergomix/quadrature.hpp"

using namespace ergomix;

TEST_CASE("gauss rule integrates monomials exactly") {
    const auto& [x, w] = gauss_rule(8);
    for (int k = 0; k <= 15; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * std::pow(x[i], k);
        const double exact = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
        CHECK(acc == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("zero integrand integrates to zero") {
    auto z = quad_integral<double>([](double) { return 0.0; }, 0.0, 1.0, 1e-10);
    CHECK(z == 0.0);
}

TEST_CASE("cubic polynomials are exact") {
    auto q = quad_integral<double>([](double t) { return 3.0 * t * t * t - 2.0 * t + 1.0; }, -1.0,
                                   2.0, 1e-12);
    // antiderivative (3/4)t^4 - t^2 + t over [-1, 2]
    const double exact = (0.75 * 16 - 4 + 2) - (0.75 - 1 - 1);
    CHECK(q == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("full-period complex exponential vanishes") {
    auto q = quad_integral<cplx>([](double t) { return std::exp(cplx{0.0, t}); }, 0.0,
                                 2.0 * std::numbers::pi, 1e-10);
    CHECK(std::abs(q) < 1e-9);
}

TEST_CASE("additivity over adjacent intervals") {
    const double tol = 1e-8;
    auto f = [](double t) { return std::sin(3.0 * t) * std::exp(-0.2 * t) + t * t; };
    const double a = 0.1, b = 1.7, c = 4.3;
    const double whole = quad_integral<double>(f, a, c, tol);
    const double left = quad_integral<double>(f, a, b, tol);
    const double right = quad_integral<double>(f, b, c, tol);
    CHECK(std::abs(whole - left - right) <= 3.0 * tol * (1.0 + std::abs(whole)));
}

TEST_CASE("shifted step integrates to the triangular overlap") {
    // Forward translation of the indicator of [2,3]; integral over [0,1] has
    // the closed form h(x) = |[x, x+1] /\ [2, 3]|.
    auto bundle = translation_make({1.0, 0.025, 64.0});
    auto& sys = *bundle.system;
    const StateVector probe = materialize(sys.basic(2));
    const auto grid = probe.as_grid().grid;
    std::vector<cplx> step(grid->size(), cplx{});
    for (std::size_t i = 0; i < grid->size(); ++i)
        if ((*grid)[i] >= 2.0 && (*grid)[i] <= 3.0) step[i] = 1.0;
    const StateVector ind = StateVector::grid_function(grid, std::move(step), probe.norm_id());

    auto g = [&](double t) { return sys.apply_T(t, ind); };
    const StateVector q = quad_integral<StateVector>(g, 0.0, 1.0, 1e-6);

    const auto& vals = q.as_grid().values;
    double max_err = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double x = (*grid)[i];
        const double overlap = std::max(0.0, std::min(x + 1.0, 3.0) - std::max(x, 2.0));
        max_err = std::max(max_err, std::abs(vals[i].real() - overlap));
    }
    // peak 1 at x = 2, support [1, 3]; edges smear over one interpolation cell
    CHECK(std::abs(grid_value(q.as_grid(), 2.0).real() - 1.0) < 0.03);
    CHECK(max_err < 0.05);
    CHECK(std::abs(grid_value(q.as_grid(), 0.9).real()) < 1e-12);
    CHECK(std::abs(grid_value(q.as_grid(), 3.1).real()) < 1e-12);
}

TEST_CASE("NaN in the integrand raises a numeric error") {
    CHECK_THROWS_AS((void)quad_integral<double>(
                        [](double t) { return t < 0.5 ? 1.0 : std::nan(""); }, 0.0, 1.0, 1e-8),
                    NumericError);
}

TEST_CASE("panel cap reached raises a quadrature error with estimates") {
    // A discontinuity at an irrational point defeats the Richardson check at
    // extreme tolerance and a tiny panel cap.
    QuadOptions opt;
    opt.max_panels = 4;
    try {
        (void)quad_integral<double>([](double t) { return t > std::numbers::sqrt2 / 2 ? 1.0 : 0.0; },
                                    0.0, 1.0, 1e-15, opt);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(std::isfinite(e.prev_estimate_norm));
        CHECK(std::isfinite(e.last_estimate_norm));
    }
}

TEST_CASE("forced boundaries make kinked integrands cheap") {
    QuadOptions opt;
    opt.forced_boundaries = {1.0};
    opt.max_panels = 8;
    auto f = [](double t) { return std::abs(t - 1.0); };
    const double q = quad_integral<double>(f, 0.0, 2.0, 1e-12, opt);
    CHECK(q == doctest::Approx(1.0).epsilon(1e-12));
}
