#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ergomix/audit.hpp"
#include "ergomix/instances.hpp"
#include "ergomix/quadrature.hpp"

using namespace ergomix;

namespace {

// Independent route: integrate the rendered orbit with the generic adaptive
// quadrature and compare against the exact segment representation.
void check_segment_against_quadrature(const FHCSystem& sys, int n, double a, double b,
                                      double tol) {
    const StateVector seg = materialize(sys.orbit_segment(n, a, b));
    const StateVector x = sys.basic(n);
    auto g = [&](double t) {
        return t >= 0.0 ? materialize(sys.apply_T(t, x)) : materialize(sys.apply_S(-t, x));
    };
    const StateVector q = quad_integral<StateVector>(g, a, b, tol);
    CHECK(distance(seg, q) <= 20.0 * tol * (1.0 + norm(seg)));
}

}  // namespace

TEST_CASE("translation: back-shift then shift restores the state exactly") {
    auto bundle = translation_make({});
    auto& sys = *bundle.system;
    const StateVector x3 = sys.basic(3);
    CHECK(distance(sys.apply_T(0.5, sys.apply_S(0.5, x3)), x3) == 0.0);
    CHECK(norm(sys.basic(1)) == 0.0);
}

TEST_CASE("translation: shifting the indicator of [2,3] gives the indicator of [1,2]") {
    auto bundle = translation_make({});
    auto& sys = *bundle.system;
    const auto grid = materialize(sys.basic(2)).as_grid().grid;
    std::vector<cplx> step(grid->size(), cplx{});
    for (std::size_t i = 0; i < grid->size(); ++i)
        if ((*grid)[i] >= 2.0 && (*grid)[i] <= 3.0) step[i] = 1.0;
    const NormId nid = NormId::weighted_lp(1.0, 1.0);
    const StateVector ind = StateVector::grid_function(grid, step, nid);

    const StateVector shifted = sys.apply_T(1.0, ind);  // exact index shift
    double max_err = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double x = (*grid)[i];
        const double expect = (x >= 1.0 && x <= 2.0) ? 1.0 : 0.0;
        max_err = std::max(max_err, std::abs(shifted.as_grid().values[i].real() - expect));
    }
    CHECK(max_err == 0.0);
}

TEST_CASE("translation: forward orbits obey the weight-decay bound") {
    const double w = 1.0;
    auto bundle = translation_make({w, 0.025, 64.0});
    auto& sys = *bundle.system;
    for (int n : {2, 3, 5}) {
        const StateVector xn = materialize(sys.basic(n));
        // L1 mass and support right edge of the hat, directly integrated.
        double mass = 0.0;
        double right = 0.0;
        const auto& g = *xn.as_grid().grid;
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            const double v =
                0.5 * (std::abs(xn.as_grid().values[i]) + std::abs(xn.as_grid().values[i + 1]));
            mass += v * (g[i + 1] - g[i]);
            if (std::abs(xn.as_grid().values[i]) > 0.0) right = std::max(right, g[i]);
        }
        for (double t : {1.0, 2.5, 6.0, 11.0}) {
            const double measured = norm(sys.apply_T(t, sys.basic(n)));
            const double bound = std::exp(-w * (t - right)) * mass;
            CHECK(measured <= bound + 1e-12);
        }
    }
}

TEST_CASE("translation: backward shifts past the cap overflow") {
    auto bundle = translation_make({1.0, 0.05, 24.0});
    CHECK_THROWS_AS((void)bundle.system->apply_S(23.0, bundle.system->basic(2)),
                    DomainOverflowError);
    CHECK_NOTHROW((void)bundle.system->apply_S(20.0, bundle.system->basic(2)));
}

TEST_CASE("translation and flows: orbit segments match generic quadrature") {
    {
        auto b = translation_make({});
        check_segment_against_quadrature(*b.system, 3, 0.2, 1.7, 1e-6);
        check_segment_against_quadrature(*b.system, 2, -1.3, 0.4, 1e-6);
    }
    {
        auto b = birth_death_make({});
        check_segment_against_quadrature(*b.system, 2, 0.2, 1.7, 1e-7);
        check_segment_against_quadrature(*b.system, 3, -0.9, 0.8, 1e-7);
    }
    {
        auto b = black_scholes_make({});
        check_segment_against_quadrature(*b.system, 2, -0.6, 1.1, 1e-6);
    }
}

TEST_CASE("criterion audit: representation-exact instances have zero residuals") {
    const std::vector<double> grid{0.3, 0.7, 1.1, 2.5};
    for (auto bundle : {translation_make({}), black_scholes_make({})}) {
        const auto rep = criterion_audit(*bundle.system, grid, grid, 8);
        CHECK(rep.all_passed());
        for (const auto& e : rep.estimates) CHECK(e.value == 0.0);
        CHECK(bundle.system->tol_inst() == 0.0);
    }
}

TEST_CASE("criterion audit: quadrature-backed instances stay within 5x quad_tol") {
    const std::vector<double> grid{0.3, 0.7, 1.1, 2.5};
    for (auto bundle : {birth_death_make({}), death_model_make({}), rudnicki_translation_make({})}) {
        const auto rep = criterion_audit(*bundle.system, grid, grid, 8);
        CHECK(rep.all_passed());
        for (const auto& e : rep.estimates) CHECK(e.value <= 5e-6);
    }
}

TEST_CASE("rudnicki: trigonometric field residual under the stencil generator") {
    auto bundle = rudnicki_translation_make({});
    REQUIRE(bundle.field.has_value());
    for (int i = 0; i <= 20; ++i) {
        const double t = -2.0 + 0.2 * i;
        CHECK(bundle.field->generator_residual(t) <= 1e-6);
    }
}

TEST_CASE("rudnicki: translating a character is modulation") {
    auto bundle = rudnicki_translation_make({});
    auto& sys = *bundle.system;
    const double s = 0.8;
    const StateVector f = materialize(bundle.field->eval(s));
    const double t = 0.5;  // grid-aligned
    const StateVector lhs = sys.apply_T(t, f);
    const StateVector rhs = axpy(std::exp(cplx{0.0, s * t}), f, 0.0, f);
    // interior agreement; the leading edge brings unknown values in from
    // outside the window
    const auto& grid = *lhs.as_grid().grid;
    double max_err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] > grid.back() - 1.0) continue;
        max_err = std::max(max_err,
                           std::abs(lhs.as_grid().values[i] - rhs.as_grid().values[i]));
    }
    CHECK(max_err < 1e-12);
}

TEST_CASE("rudnicki: Y-norm of x restricted to the window") {
    auto bundle = rudnicki_translation_make({});
    const StateVector probe = materialize(bundle.system->basic(2));
    const auto grid = probe.as_grid().grid;
    const double w = grid->back();
    std::vector<cplx> vals(grid->size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = (*grid)[i];
    const StateVector g = StateVector::grid_function(grid, std::move(vals), NormId::weighted_sup());
    CHECK(norm(g) == doctest::Approx(w / (1.0 + w)).epsilon(1e-9));
}

TEST_CASE("birth-death: eigenvector recurrence at lambda = 0") {
    auto bundle = birth_death_make({});
    const StateVector f = materialize(bundle.field->eval(0.0));
    const auto& c = f.as_coeffs().coeffs;
    for (std::size_t k = 0; 2 * k < 12; ++k) {
        CHECK(c[2 * k].real() == doctest::Approx(std::pow(-0.25, k)).epsilon(1e-14));
        if (2 * k + 1 < c.size()) CHECK(std::abs(c[2 * k + 1]) == 0.0);
    }
    CHECK(bundle.field->generator_residual(0.0) < 1e-12);
}

TEST_CASE("birth-death: identity at t = 0 and unimodular eigenvalues") {
    auto bundle = birth_death_make({});
    auto& sys = *bundle.system;
    const StateVector f = bundle.field->eval(0.35);
    CHECK(distance(sys.apply_T(0.0, f), f) == 0.0);
    CHECK(norm(sys.apply_T(1.7, f)) == doctest::Approx(norm(f)).epsilon(1e-12));
}

TEST_CASE("birth-death: parameter conditions rejected with the condition cited") {
    BirthDeathParams p;
    p.a = 1.0;
    p.b = 1.0;
    p.d = 1.0;
    try {
        (void)birth_death_make(p);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("0<|b|<|d|") != std::string::npos);
    }
    BirthDeathParams q;
    q.a = 2.0;  // |a| >= |b+d|
    CHECK_THROWS_AS((void)birth_death_make(q), ParameterError);
}

TEST_CASE("birth-death: insufficient truncation is detected") {
    BirthDeathParams p;
    p.trunc_dim = 24;
    p.field_half_range = 0.7;  // slow eigenvector decay at the interval edge
    CHECK_THROWS_AS((void)birth_death_make(p), TruncationError);
}

TEST_CASE("death model: geometric eigenvector at lambda = 0") {
    auto bundle = death_model_make({});
    const StateVector f = materialize(bundle.field->eval(0.0));
    const auto& c = f.as_coeffs().coeffs;
    for (std::size_t n = 0; n < 10; ++n)
        CHECK(c[n].real() == doctest::Approx(std::pow(0.5, n)).epsilon(1e-14));
}

TEST_CASE("death model: lambda = -alpha_1 truncates the eigenvector") {
    DeathModelParams p;
    p.alpha = SeqSpec{{0.3, 0.45}, 0.5};
    auto bundle = death_model_make(p);
    // recurrence with lambda = -alpha_1 kills every later component
    const StateVector f = materialize(
        StateVector::eigen_combo({{cplx{-0.3, 0.0}, cplx{1.0, 0.0}}},
                                 bundle.system->spectral_basis(), bundle.system->norm_id()));
    const auto& c = f.as_coeffs().coeffs;
    CHECK(c[0] == cplx{1.0, 0.0});
    for (std::size_t n = 1; n < c.size(); ++n) CHECK(std::abs(c[n]) == 0.0);
}

TEST_CASE("death model: bidiagonal residual on the truncation interior") {
    auto bundle = death_model_make({});
    for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0})
        CHECK(bundle.field->generator_residual(t) < 1e-10);
}

TEST_CASE("death model: condition violation is rejected") {
    DeathModelParams p;
    p.alpha = SeqSpec{{}, 1.0};
    p.beta = SeqSpec{{}, 1.0};
    try {
        (void)death_model_make(p);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("sup alpha_n < liminf beta_n") != std::string::npos);
    }
}

TEST_CASE("black-scholes: symbol arithmetic for the canonical parameters") {
    auto bundle = black_scholes_make({});
    const auto params = bundle.system->params_json();
    CHECK(params.at("nu").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(params.at("gamma").get<double>() == doctest::Approx(-0.5).epsilon(1e-12));
    // g(z) = z^2 - z/2 - 1/2 has roots 1 and -1/2; the strip keeps mu = 1.
    const StateVector f0 = bundle.field->eval(0.0);
    CHECK(f0.as_eigen().terms[0].param.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f0.as_eigen().terms[0].param.imag()) < 1e-12);
}

TEST_CASE("black-scholes: diagonal factors cancel exactly on monomials") {
    auto bundle = black_scholes_make({});
    auto& sys = *bundle.system;
    const StateVector h = bundle.field->eval(0.7);
    const StateVector round = sys.apply_T(1.3, sys.apply_S(1.3, h));
    REQUIRE(round.kind() == RepKind::EigenCombo);
    const cplx c = round.as_eigen().terms[0].coeff;
    CHECK(std::abs(c - cplx{1.0, 0.0}) < 1e-14);
}

TEST_CASE("black-scholes: field eigenvalues solve the symbol equation") {
    auto bundle = black_scholes_make({});
    const auto basis = bundle.system->spectral_basis();
    for (double xi : {-1.5, -0.4, 0.0, 0.9, 1.8}) {
        const StateVector f = bundle.field->eval(xi);
        const cplx ev = basis->eigenvalue(f.as_eigen().terms[0].param);
        CHECK(std::abs(ev - cplx{0.0, xi}) < 1e-12);
        CHECK(bundle.field->generator_residual(xi) <= 1e-6);
    }
}

TEST_CASE("black-scholes: parameters outside the chaos regime are rejected") {
    BlackScholesParams p;
    p.sigma = 0.5;  // nu ~ 0.354, s*nu < 1
    try {
        (void)black_scholes_make(p);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("s*nu > 1") != std::string::npos);
    }
    BlackScholesParams q;
    q.s = 0.9;
    CHECK_THROWS_AS((void)black_scholes_make(q), ParameterError);
}

TEST_CASE("black-scholes: spectral window errors carry the attainable range") {
    BlackScholesParams p;
    p.field_half_range = 50.0;  // beyond the attainable window for s = 2
    try {
        (void)black_scholes_make(p);
        FAIL("expected SpectralRangeError");
    } catch (const SpectralRangeError& e) {
        CHECK(e.window_hi > 0.0);
        CHECK(e.window_hi < 50.0);
        CHECK(e.window_lo == -e.window_hi);
    }
}

TEST_CASE("eigenfield construction: modulations cancel and orbits decay") {
    auto bd = birth_death_make({});
    auto sys = eigenfield_to_fhc("bd_fhc", *bd.field, {}, 1e-6);
    const StateVector x2 = sys->basic(2);
    CHECK(distance(sys->apply_T(0.0, x2), x2) == 0.0);
    const double round = distance(sys->apply_T(0.8, sys->apply_S(0.8, x2)), x2);
    CHECK(round <= 2e-6 * (1.0 + norm(x2)));

    const double d10 = norm(sys->apply_T(10.0, x2));
    const double d20 = norm(sys->apply_T(20.0, x2));
    const double d40 = norm(sys->apply_T(40.0, x2));
    CHECK(d20 < d10);
    CHECK(d40 < d20);
}

TEST_CASE("eigenfield construction: bump support must stay inside the interval") {
    auto bd = birth_death_make({});
    std::vector<ProfileSpec> bad{{0.4, 0.2, 0}};  // support [0.2, 0.6] exceeds 0.5
    CHECK_THROWS_AS((void)eigenfield_to_fhc("bd_bad", *bd.field, bad, 1e-6), ParameterError);
}

TEST_CASE("strong continuity probe decreases along halving steps") {
    for (auto bundle : {translation_make({}), birth_death_make({})}) {
        auto& sys = *bundle.system;
        const StateVector x = sys.basic(3);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 12; ++k) {
            const double d = distance(sys.apply_T(std::pow(2.0, -k), x), x);
            CHECK(d <= prev + 1e-12);
            prev = d;
        }
        CHECK(prev < 0.05 * (1.0 + norm(x)));
    }
}
