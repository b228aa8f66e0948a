#include <doctest.h>

#include <cmath>

#include "ergomix/rng.hpp"
#include "ergomix/stats.hpp"

using namespace ergomix;

TEST_CASE("streams are reproducible and counter-separated") {
    Rng a(123, 7, 42), b(123, 7, 42), c(123, 7, 43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform01 lies in [0,1) with plausible moments") {
    Rng rng(99, 0, 0);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("normal sampler has plausible moments") {
    Rng rng(7, 1, 2);
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
        sum4 += z * z * z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.08));
}

TEST_CASE("cdf sampling matches the masses") {
    Rng rng(31, 4, 1);
    const std::vector<double> cdf{0.5, 0.75, 1.0};
    std::vector<double> counts(3, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[rng.sample_cdf(cdf)] += 1.0;
    const std::vector<double> expected{0.5 * n, 0.25 * n, 0.25 * n};
    CHECK(stats::chi2_gof(counts, expected).p_value > 0.001);
}
