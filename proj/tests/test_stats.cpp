#include <doctest.h>

#include <cmath>

#include "ergomix/stats.hpp"

using namespace ergomix;
using namespace ergomix::stats;

TEST_CASE("ks statistic is zero on identical multisets") {
    std::vector<double> a{0.3, 1.1, 1.1, -2.0, 0.0};
    const auto r = ks_two_sample(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("ks statistic is one on separated supports") {
    std::vector<double> a{0.0, 0.1, 0.2};
    std::vector<double> b{5.0, 5.1, 5.2, 6.0};
    const auto r = ks_two_sample(a, b);
    CHECK(r.statistic == 1.0);
    CHECK(r.p_value < 0.05);
}

TEST_CASE("kolmogorov survival function matches the reference values") {
    // Frozen from an independent reference implementation.
    const double fixtures[][2] = {
        {0.3, 0.9999906941986655},  {0.5, 0.9639452436648751},
        {0.8284, 0.49870118123785884}, {1.0, 0.26999967167735456},
        {1.3581, 0.0499996304316674},  {2.0, 0.0006709252557796953},
    };
    for (const auto& f : fixtures) CHECK(kolmogorov_q(f[0]) == doctest::Approx(f[1]).epsilon(1e-10));
}

TEST_CASE("regularized upper incomplete gamma matches the reference values") {
    const double fixtures[][3] = {
        {0.5, 0.5, 0.31731050786291115}, {1.5, 2.0, 0.26146412994911117},
        {4.0, 3.0, 0.6472318887822313},  {7.5, 7.5, 0.4514172112257256},
        {25.0, 30.0, 0.1572420272383916},
    };
    for (const auto& f : fixtures) CHECK(gamma_q(f[0], f[1]) == doctest::Approx(f[2]).epsilon(1e-12));
}

TEST_CASE("chi-square survival matches the reference values") {
    const double fixtures[][3] = {
        {3.84, 1, 0.05004352124870519},
        {10.0, 5, 0.07523524614651217},
        {22.3, 14, 0.07265671703032281},
    };
    for (const auto& f : fixtures) CHECK(chi2_sf(f[0], f[1]) == doctest::Approx(f[2]).epsilon(1e-12));
}

TEST_CASE("ks p-values are roughly uniform under the null") {
    // Self-calibration: repeated two-sample tests on same-law samples.
    Rng rng(77, 3, 0);
    int below_10 = 0, below_50 = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> a(400), b(400);
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        const double p = ks_two_sample(a, b).p_value;
        if (p < 0.1) ++below_10;
        if (p < 0.5) ++below_50;
    }
    CHECK(below_10 > 10);
    CHECK(below_10 < 80);
    CHECK(below_50 > 120);
    CHECK(below_50 < 280);
}

TEST_CASE("holm correction") {
    CHECK(holm_any_rejected({0.001, 0.5, 0.9}, 0.01));        // 0.001 <= 0.01/3
    CHECK(!holm_any_rejected({0.005, 0.5, 0.9}, 0.01));       // 0.005 > 0.01/3
    CHECK(!holm_any_rejected({}, 0.01));
}

TEST_CASE("bootstrap covariance identity at zero lag") {
    Rng rng(5, 5, 5);
    std::vector<double> a(2000);
    for (auto& v : a) v = rng.uniform(-1, 1);
    Rng boot(6, 6, 6);
    const auto est = cov_with_bootstrap(a, a, 200, boot);
    const auto s = summarize(a);
    CHECK(est.cov == doctest::Approx(s.sd * s.sd).epsilon(1e-12));
    CHECK(est.bootstrap_sd > 0.0);
    CHECK(est.cov > 3.0 * est.bootstrap_sd);
}

TEST_CASE("constant observables have exactly zero covariance") {
    std::vector<double> ones(500, 1.0), other(500);
    Rng rng(14, 0, 0);
    for (auto& v : other) v = rng.normal();
    Rng boot(15, 0, 0);
    CHECK(cov_with_bootstrap(ones, other, 50, boot).cov == 0.0);
    Rng boot2(16, 0, 0);
    CHECK(cov_with_bootstrap(ones, ones, 50, boot2).cov == 0.0);
}

TEST_CASE("pearson correlation of a sample with itself is exactly one") {
    Rng rng(9, 9, 9);
    std::vector<double> a(500);
    for (auto& v : a) v = rng.normal();
    std::vector<double> b = a;
    CHECK(pearson_corr(a, b) == 1.0);
}

TEST_CASE("energy test separates shifted laws and accepts equal ones") {
    Rng rng(11, 1, 0);
    std::vector<std::vector<double>> a, b, c;
    for (int i = 0; i < 600; ++i) {
        a.push_back({rng.normal(), rng.normal()});
        b.push_back({rng.normal(), rng.normal()});
        c.push_back({rng.normal() + 0.8, rng.normal()});
    }
    Rng perm(12, 2, 0);
    CHECK(energy_two_sample(a, b, 100, perm).p_value > 0.01);
    Rng perm2(13, 2, 0);
    CHECK(energy_two_sample(a, c, 100, perm2).p_value < 0.02);
}
