#include <doctest.h>

#include <cmath>

#include "ergomix/instances.hpp"
#include "ergomix/pushforward.hpp"
#include "ergomix/quadrature.hpp"
#include "ergomix/stats.hpp"

using namespace ergomix;

namespace {

TruncationPlan forced_plan(const FHCSystem& sys, const MeasureParams& mp, int J,
                           std::uint64_t seed) {
    Rng rng(seed, 0xca1, 0);
    return calibrate_truncation(sys, mp, 1e-3, rng, J).second;
}

ModelFunction constant_height_model(const MeasureParams& mp, double window, std::uint32_t h,
                                    std::uint64_t seed) {
    Rng rng(seed, 0xf00, 0);
    const ModelFunction f = sample_model(mp, window, rng);
    std::vector<std::uint32_t> heights(f.heights().size(), h);
    return ModelFunction(f.breakpoints(), heights, f.j_min(), f.window());
}

}  // namespace

TEST_CASE("phi of the all-ones mark pattern is the zero vector") {
    auto bundle = translation_make({});
    const MeasureParams mp = default_measure_params();
    const TruncationPlan plan = forced_plan(*bundle.system, mp, 12, 1);
    const ModelFunction f = constant_height_model(mp, plan.window(), 1, 2);
    const StateVector z = phi(f, *bundle.system, plan);
    CHECK(norm(z) == 0.0);
    CHECK(z.is_structural_zero());
}

TEST_CASE("phi of a single marked gap matches the analytic smear") {
    auto bundle = translation_make({});
    auto& sys = *bundle.system;
    const MeasureParams mp = default_measure_params();
    const TruncationPlan plan = forced_plan(sys, mp, 12, 3);
    ModelFunction base = constant_height_model(mp, plan.window(), 1, 4);
    std::vector<std::uint32_t> heights = base.heights();
    heights[static_cast<std::size_t>(0 - base.j_min())] = 3;  // gap [s_0, s_2] gets mark 3
    const ModelFunction f(base.breakpoints(), heights, base.j_min(), base.window());

    const StateVector ph = materialize(phi(f, sys, plan));
    const double a = f.s(0), b = f.s(1);
    // pointwise oracle: exact integral of the (piecewise-linear) rendered
    // basic over the shifted window
    const StateVector hat = materialize(sys.basic(3));
    const auto& hg = hat.as_grid();
    auto exact_interp_integral = [&](double lo, double hi) {
        const auto& xs = *hg.grid;
        double acc = 0.0;
        for (std::size_t c = 0; c + 1 < xs.size(); ++c) {
            const double l = std::max(lo, xs[c]), r = std::min(hi, xs[c + 1]);
            if (r <= l) continue;
            const cplx vl = grid_value(hg, l), vr = grid_value(hg, r);
            acc += 0.5 * (vl.real() + vr.real()) * (r - l);
        }
        return acc;
    };
    const auto& grid = *ph.as_grid().grid;
    double max_err = 0.0;
    for (std::size_t i = 0; i < grid.size(); i += 7) {
        const double x = grid[i];
        max_err = std::max(max_err,
                           std::abs(ph.as_grid().values[i].real() - exact_interp_integral(x + a, x + b)));
    }
    CHECK(max_err < 1e-12);
}

TEST_CASE("mirrored halves are reflections of each other") {
    auto bundle = translation_make({});
    auto& sys = *bundle.system;
    // the backward segment over [-b,-a] is the forward segment over [a,b]
    // reflected about the hat center (shifts small enough that nothing is
    // absorbed at the boundary)
    const double a = 0.3, b = 1.0;
    const StateVector fwd = materialize(sys.orbit_segment(4, a, b));
    const StateVector bwd = materialize(sys.orbit_segment(4, -b, -a));
    const StateVector hat = materialize(sys.basic(4));
    double center = 0.0;
    double best = 0.0;
    const auto& g = *hat.as_grid().grid;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(hat.as_grid().values[i]) > best) {
            best = std::abs(hat.as_grid().values[i]);
            center = g[i];
        }
    double max_err = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 5) {
        const double x = g[i];
        const double mirrored = 2.0 * center - x;
        const cplx lhs = grid_value(bwd.as_grid(), x);
        const cplx rhs = grid_value(fwd.as_grid(), mirrored);
        max_err = std::max(max_err, std::abs(lhs - rhs));
    }
    CHECK(max_err < 1e-9);
}

TEST_CASE("phi requires window coverage") {
    auto bundle = translation_make({});
    const MeasureParams mp = default_measure_params();
    TruncationPlan plan = forced_plan(*bundle.system, mp, 10, 5);
    Rng rng(6, 0, 0);
    const ModelFunction f = sample_model(mp, 4.0, rng);  // too narrow for J = 10
    CHECK_THROWS_AS((void)phi(f, *bundle.system, plan), CoverageError);
}

TEST_CASE("changing one mark changes exactly that gap's atoms") {
    auto bundle = translation_make({});
    auto& sys = *bundle.system;
    const MeasureParams mp = default_measure_params();
    const TruncationPlan plan = forced_plan(sys, mp, 10, 7);
    Rng rng(8, 0, 0);
    const ModelFunction f = sample_model(mp, plan.window(), rng);

    std::vector<std::uint32_t> heights = f.heights();
    const int j_target = 4;
    const std::size_t idx = static_cast<std::size_t>(j_target - f.j_min());
    heights[idx] = heights[idx] == 2 ? 3 : 2;
    const ModelFunction f2(f.breakpoints(), heights, f.j_min(), f.window());

    const StateVector d = axpy(1.0, phi(f, sys, plan), -1.0, phi(f2, sys, plan));
    for (const auto& atom : d.as_orbit().atoms) {
        CHECK(atom.t_lo == f.s(j_target));
        CHECK(atom.t_hi == f.s(j_target + 1));
    }
    CHECK(!d.as_orbit().atoms.empty());
}

TEST_CASE("equivariance residuals for both shift cases") {
    const MeasureParams mp = default_measure_params();
    auto bundle = translation_make({});
    auto& sys = *bundle.system;
    const TruncationPlan plan = forced_plan(sys, mp, 40, 9);
    Rng rng(10, 0, 0);
    const ModelFunction f = sample_model(mp, plan.window(), rng);

    CHECK(equivariance_residual(f, 0.0, sys, plan) == 0.0);

    // case 1: the shift stays inside the straddling gap
    const double a1 = 0.5 * (-f.s(-1));
    CHECK(equivariance_residual(f, a1, sys, plan) <= 1e-6);

    // case 2: the shift crosses breakpoints
    CHECK(equivariance_residual(f, 2.7, sys, plan) <=
          2.0 * plan.tail_bound + 1e-5);
}

TEST_CASE("pettis probes: zero basic, decay, and the translation bound") {
    auto bundle = translation_make({});
    auto& sys = *bundle.system;
    Rng rng(11, 0, 0);
    CHECK(pettis_tail_probe(sys, 1, 10.0, 4, rng) == 0.0);

    const double p10 = pettis_tail_probe(sys, 3, 10.0, 4, rng);
    const double p20 = pettis_tail_probe(sys, 3, 20.0, 4, rng);
    CHECK(p20 <= p10 + 1e-12);
    CHECK(p20 <= 1e-3 * p10);  // exponential weight decay on the backward side

    // the forward orbit beyond the support renders exactly zero, matching
    // the decay hint
    const auto hint = sys.orbit_decay_hint(3, 10.0);
    REQUIRE(hint.has_value());
    CHECK(*hint == 0.0);
    CHECK(norm(sys.orbit_segment(3, 10.0, 18.0)) == 0.0);
}

TEST_CASE("calibration: translation reaches the target and records levels") {
    auto bundle = translation_make({});
    const MeasureParams mp = default_measure_params();
    Rng rng(12, 0, 0);
    const auto [params, plan] = calibrate_truncation(*bundle.system, mp, 1e-3, rng, 40);
    CHECK(plan.J == 40);
    CHECK(plan.met_target);
    CHECK(plan.tail_bound <= 1e-3);
    CHECK(!plan.per_level_tails.empty());
    CHECK(std::isfinite(params.beta_log_sum));
}

TEST_CASE("calibration: infinite target yields the minimal plan") {
    auto bundle = translation_make({});
    const MeasureParams mp = default_measure_params();
    Rng rng(13, 0, 0);
    const auto [params, plan] = calibrate_truncation(
        *bundle.system, mp, std::numeric_limits<double>::infinity(), rng);
    CHECK(plan.J == 1);
    CHECK(std::isfinite(plan.tail_bound));
    (void)params;
}

TEST_CASE("calibration: plans are produced for the spectral instances") {
    for (auto bundle : {birth_death_make({}), black_scholes_make({})}) {
        const MeasureParams mp = default_measure_params();
        Rng rng(14, 0, 0);
        const auto [params, plan] = calibrate_truncation(*bundle.system, mp, 1e-3, rng, 40);
        CHECK(plan.J == 40);
        CHECK(std::isfinite(plan.tail_bound));
        CHECK(!plan.per_level_tails.empty());
        // probes decrease across measured levels overall
        const auto& lv = plan.per_level_tails;
        CHECK(lv.back().probe <= lv.front().probe + 1e-12);
        (void)params;
    }
}

TEST_CASE("truncation monotonicity on sampled model functions") {
    auto bundle = birth_death_make({});
    auto& sys = *bundle.system;
    const MeasureParams mp = default_measure_params();
    const TruncationPlan plan10 = forced_plan(sys, mp, 10, 15);
    const TruncationPlan plan20 = forced_plan(sys, mp, 20, 15);
    Rng rng(16, 0, 0);
    for (int i = 0; i < 5; ++i) {
        const ModelFunction f = sample_model(mp, plan20.window(), rng);
        const double d = distance(phi(f, sys, plan10), phi(f, sys, plan20));
        CHECK(d <= plan10.tail_bound + 1e-9);
    }
}

TEST_CASE("the sampled field has the analytic mean: sum of p_k times hat mass") {
    // The gaps tile the line and marks are independent of positions, so the
    // expected rendered value at any safely interior point is the constant
    // sum over heights of p_k * mass(hat_k).  This checks sampler and factor
    // map together against a closed form.
    auto bundle = translation_make({});
    auto& sys = *bundle.system;
    const MeasureParams mp = default_measure_params();
    const TruncationPlan plan = forced_plan(sys, mp, 40, 21);

    double expected = 0.0;
    for (std::size_t k = 2; k <= mp.p.size(); ++k) {
        const StateVector hat = materialize(sys.basic(static_cast<int>(k)));
        const auto& g = hat.as_grid();
        double mass = 0.0;
        for (std::size_t i = 0; i + 1 < g.grid->size(); ++i)
            mass += 0.5 * (g.values[i].real() + g.values[i + 1].real()) *
                    ((*g.grid)[i + 1] - (*g.grid)[i]);
        expected += mp.p[k - 1] * mass;
    }

    const std::size_t n = 8000;
    std::vector<double> at2(n), at5(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(42424242, 17, i);
        const StateVector x = materialize(sample_invariant(sys, mp, plan, rng));
        at2[i] = grid_value(x.as_grid(), 2.0).real();
        at5[i] = grid_value(x.as_grid(), 5.0).real();
    }
    for (const auto* v : {&at2, &at5}) {
        const auto s = stats::summarize(*v);
        const double se = s.sd / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(s.mean - expected) <= 4.0 * se);
    }
}

TEST_CASE("truncation plans survive a JSON round trip") {
    auto bundle = translation_make({});
    const MeasureParams mp = default_measure_params();
    const TruncationPlan plan = forced_plan(*bundle.system, mp, 20, 23);
    const TruncationPlan back = TruncationPlan::from_json(plan.to_json());
    CHECK(back.J == plan.J);
    CHECK(back.tail_bound == plan.tail_bound);
    CHECK(back.per_level_tails.size() == plan.per_level_tails.size());
    CHECK(back.level_tail_sum(1) == plan.level_tail_sum(1));
}

TEST_CASE("sample_invariant: degenerate marks give the zero vector") {
    auto bundle = translation_make({});
    const MeasureParams mp = degenerate_measure_params(1, 2);
    const TruncationPlan plan = forced_plan(*bundle.system, mp, 12, 17);
    Rng rng(18, 0, 0);
    for (int i = 0; i < 10; ++i)
        CHECK(norm(sample_invariant(*bundle.system, mp, plan, rng)) == 0.0);
}

TEST_CASE("sample_invariant: reproducible draws and seed-independent law") {
    auto bundle = translation_make({});
    const MeasureParams mp = default_measure_params();
    const TruncationPlan plan = forced_plan(*bundle.system, mp, 20, 19);

    std::vector<double> norms_a, norms_b, norms_c;
    for (int i = 0; i < 1000; ++i) {
        Rng ra(20, 1, static_cast<std::uint64_t>(i));
        Rng rb(20, 1, static_cast<std::uint64_t>(i));
        Rng rc(21, 2, static_cast<std::uint64_t>(i));
        norms_a.push_back(norm(sample_invariant(*bundle.system, mp, plan, ra)));
        norms_b.push_back(norm(sample_invariant(*bundle.system, mp, plan, rb)));
        norms_c.push_back(norm(sample_invariant(*bundle.system, mp, plan, rc)));
    }
    CHECK(norms_a == norms_b);  // bit-exact reproducibility
    CHECK(stats::ks_two_sample(norms_a, norms_c).p_value > 0.01);
}
