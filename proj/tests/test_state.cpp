#include <doctest.h>

#include <cmath>

#include "ergomix/instances.hpp"
#include "ergomix/rng.hpp"
#include "ergomix/state.hpp"

using namespace ergomix;

namespace {

std::shared_ptr<const std::vector<double>> log_grid(double lo, double hi, std::size_t n) {
    auto g = std::make_shared<std::vector<double>>(n);
    for (std::size_t i = 0; i < n; ++i)
        (*g)[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

std::shared_ptr<const std::vector<double>> uniform_grid(double lo, double step, std::size_t n) {
    auto g = std::make_shared<std::vector<double>>(n);
    for (std::size_t i = 0; i < n; ++i) (*g)[i] = lo + step * static_cast<double>(i);
    return g;
}

StateVector random_grid_state(Rng& rng, const std::shared_ptr<const std::vector<double>>& grid,
                              NormId norm) {
    std::vector<cplx> v(grid->size());
    for (auto& c : v) c = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return StateVector::grid_function(grid, std::move(v), norm);
}

}  // namespace

TEST_CASE("zero grid function has zero norm") {
    auto grid = uniform_grid(0.0, 0.5, 3);
    auto z = StateVector::grid_function(grid, std::vector<cplx>(3, cplx{}),
                                        NormId::weighted_lp(1.0, 1.0));
    CHECK(norm(z) == 0.0);
    CHECK(z.is_structural_zero());
}

TEST_CASE("Y-norm of the constant function is 1/2 at tau=0") {
    // Supremum of 1/((1+x^s)(1+x^-0)) approached as x -> 0; brute-force
    // maximization over a dense log grid is the oracle.
    for (double s : {0.7, 1.0, 2.0}) {
        auto grid = log_grid(-45.0, 6.0, 4001);
        auto u = StateVector::grid_function(grid, std::vector<cplx>(grid->size(), cplx{1.0, 0.0}),
                                            NormId::yst_sup(s, 0.0));
        double brute = 0.0;
        for (double x : *grid) brute = std::max(brute, 1.0 / ((1.0 + std::pow(x, s)) * 2.0));
        CHECK(norm(u) == doctest::Approx(brute).epsilon(1e-12));
        CHECK(norm(u) == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("l1 norm of a finite coefficient sequence") {
    auto x = StateVector::coeff_seq({1.0, 0.0, -0.25, 0.0, 0.0625}, NormId::lp(1.0));
    CHECK(norm(x) == doctest::Approx(21.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("linear_combine identities") {
    auto grid = uniform_grid(0.0, 1.0, 3);
    const NormId n = NormId::weighted_lp(1.0, 0.5);
    auto x = StateVector::grid_function(grid, {cplx{1, 0}, cplx{2, 0}, cplx{0, 1}}, n);
    auto y = StateVector::grid_function(grid, {cplx{0, 1}, cplx{1, 1}, cplx{3, 0}}, n);

    CHECK(distance(axpy(1.0, x, 0.0, y), x) == 0.0);
    CHECK(norm(axpy(1.0, x, -1.0, x)) == 0.0);
}

TEST_CASE("eigen combos merge equal parameters") {
    auto bundle = black_scholes_make({});
    const StateVector h = bundle.field->eval(0.4);
    const StateVector sum = axpy(2.0, h, 3.0, h);
    REQUIRE(sum.kind() == RepKind::EigenCombo);
    REQUIRE(sum.as_eigen().terms.size() == 1);
    CHECK(sum.as_eigen().terms[0].coeff == cplx{5.0, 0.0});
    CHECK(sum.as_eigen().terms[0].param == h.as_eigen().terms[0].param);
}

TEST_CASE("mixed representation kinds are rejected") {
    auto grid = uniform_grid(0.0, 1.0, 2);
    auto g = StateVector::grid_function(grid, {cplx{1, 0}, cplx{1, 0}},
                                        NormId::weighted_lp(1.0, 1.0));
    auto c = StateVector::coeff_seq({1.0}, NormId::lp(1.0));
    CHECK_THROWS_AS((void)axpy(1.0, g, 1.0, c), TypeError);
}

TEST_CASE("incompatible norm and representation") {
    auto x = StateVector::coeff_seq({1.0}, NormId::weighted_sup());
    CHECK_THROWS_AS((void)norm(x), ConfigError);
}

TEST_CASE("grid invariants enforced") {
    auto bad = std::make_shared<std::vector<double>>(std::vector<double>{0.0, 0.0, 1.0});
    CHECK_THROWS_AS(
        (void)StateVector::grid_function(bad, std::vector<cplx>(3), NormId::weighted_sup()),
        ConfigError);
    auto grid = uniform_grid(0.0, 1.0, 2);
    CHECK_THROWS_AS(
        (void)StateVector::grid_function(grid, {cplx{std::nan("")}, cplx{}}, NormId::weighted_sup()),
        NumericError);
}

TEST_CASE("norm properties: triangle inequality and homogeneity") {
    Rng rng(2024, 1, 0);
    auto grid = uniform_grid(0.0, 0.02, 201);
    const NormId norms[] = {NormId::weighted_lp(1.0, 0.7), NormId::weighted_sup(),
                            NormId::yst_sup(1.5, 0.3)};
    for (const NormId& n : norms) {
        for (int trial = 0; trial < 50; ++trial) {
            const StateVector a = random_grid_state(rng, grid, n);
            const StateVector b = random_grid_state(rng, grid, n);
            const double lhs = norm(axpy(1.0, a, 1.0, b));
            CHECK(lhs <= norm(a) + norm(b) + 1e-12 * (1.0 + lhs));
            const cplx alpha{rng.uniform(-2, 2), rng.uniform(-2, 2)};
            const double h = norm(axpy(alpha, a, 0.0, a));
            CHECK(h == doctest::Approx(std::abs(alpha) * norm(a)).epsilon(1e-12));
        }
    }
    for (double p : {1.0, 2.0, 3.5}) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<cplx> va(32), vb(32);
            for (auto& c : va) c = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            for (auto& c : vb) c = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            auto a = StateVector::coeff_seq(va, NormId::lp(p));
            auto b = StateVector::coeff_seq(vb, NormId::lp(p));
            CHECK(norm(axpy(1.0, a, 1.0, b)) <= norm(a) + norm(b) + 1e-12);
        }
    }
}

TEST_CASE("state JSON round trip") {
    auto grid = uniform_grid(0.0, 0.5, 3);
    auto x = StateVector::grid_function(grid, {cplx{1, 2}, cplx{-0.5, 0}, cplx{0, 3}},
                                        NormId::weighted_lp(1.0, 0.25));
    const nlohmann::json j = to_json(x);
    CHECK(j.at("kind") == "grid_function");
    const StateVector back = state_from_json(j);
    CHECK(distance(x, back) == 0.0);

    auto c = StateVector::coeff_seq({cplx{1, -1}, cplx{0, 2}}, NormId::lp(2.0));
    CHECK(distance(c, state_from_json(to_json(c))) == 0.0);
}

TEST_CASE("orbit combo JSON round trip through a basis registry") {
    auto bundle = translation_make({});
    const StateVector x = bundle.system->orbit_segment(3, 0.25, 1.5);
    BasisRegistry reg;
    reg.orbit.push_back(bundle.system->orbit_basis());
    const StateVector back = state_from_json(to_json(x), reg);
    CHECK(back.kind() == RepKind::OrbitCombo);
    CHECK(distance(x, back) == 0.0);
}
