#include "ergomix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ergomix/errors.hpp"

namespace ergomix::stats {

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.18) return 1.0;  // series needs many terms; Q is 1 to double precision
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) || std::abs(term) < 1e-300) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ConfigError("ks_two_sample: empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    // Remaining one-sided tail; F of the exhausted sample is 1 there.
    if (i < sa.size()) d = std::max(d, 1.0 - static_cast<double>(j) / nb);
    if (j < sb.size()) d = std::max(d, 1.0 - static_cast<double>(i) / na);

    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_q(lambda)};
}

namespace {

// Regularized lower incomplete gamma by series (x < a + 1).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 512; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma by continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 512; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double x, double df) { return gamma_q(0.5 * df, 0.5 * x); }

Chi2Result chi2_gof(std::span<const double> observed, std::span<const double> expected) {
    if (observed.size() != expected.size() || observed.empty())
        throw ConfigError("chi2_gof: size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw ConfigError("chi2_gof: nonpositive expected count");
        const double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    const double df = static_cast<double>(observed.size()) - 1.0;
    return {stat, df, chi2_sf(stat, df)};
}

bool holm_any_rejected(std::vector<double> p_values, double alpha) {
    if (p_values.empty()) return false;
    std::sort(p_values.begin(), p_values.end());
    // The step-down procedure rejects at least one hypothesis iff the
    // smallest p-value passes its Bonferroni step.
    return p_values.front() <= alpha / static_cast<double>(p_values.size());
}

Summary summarize(std::span<const double> v) {
    Summary s;
    s.n = v.size();
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.sd = v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
    return s;
}

double pearson_corr(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ConfigError("pearson_corr: bad input");
    if (std::equal(a.begin(), a.end(), b.begin())) return 1.0;  // self-correlation, exactly
    const Summary sa = summarize(a), sb = summarize(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - sa.mean) * (b[i] - sb.mean);
    acc /= static_cast<double>(a.size() - 1);
    if (sa.sd == 0.0 && sb.sd == 0.0) return 1.0;  // identical constants
    if (sa.sd == 0.0 || sb.sd == 0.0) return 0.0;
    return acc / (sa.sd * sb.sd);
}

CovEstimate cov_with_bootstrap(std::span<const double> a, std::span<const double> b, int n_boot,
                               Rng& rng) {
    if (a.size() != b.size() || a.size() < 2) throw ConfigError("cov_with_bootstrap: bad input");
    const std::size_t n = a.size();
    auto cov_of = [&](std::span<const std::size_t> idx) {
        double ma = 0.0, mb = 0.0;
        for (std::size_t i : idx) {
            ma += a[i];
            mb += b[i];
        }
        ma /= static_cast<double>(idx.size());
        mb /= static_cast<double>(idx.size());
        double acc = 0.0;
        for (std::size_t i : idx) acc += (a[i] - ma) * (b[i] - mb);
        return acc / static_cast<double>(idx.size() - 1);
    };
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    CovEstimate est;
    est.cov = cov_of(all);

    std::vector<double> boots(static_cast<std::size_t>(n_boot));
    std::vector<std::size_t> idx(n);
    for (int bI = 0; bI < n_boot; ++bI) {
        for (std::size_t i = 0; i < n; ++i)
            idx[i] = static_cast<std::size_t>(rng.next_u64() % n);
        boots[static_cast<std::size_t>(bI)] = cov_of(idx);
    }
    est.bootstrap_sd = summarize(boots).sd;
    return est;
}

namespace {

double mean_pair_dist(std::span<const std::vector<double>> u,
                      std::span<const std::vector<double>> v) {
    double acc = 0.0;
    for (const auto& x : u)
        for (const auto& y : v) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
            acc += std::sqrt(d2);
        }
    return acc / (static_cast<double>(u.size()) * static_cast<double>(v.size()));
}

double energy_stat(std::span<const std::vector<double>> a,
                   std::span<const std::vector<double>> b) {
    const double ab = mean_pair_dist(a, b);
    const double aa = mean_pair_dist(a, a);
    const double bb = mean_pair_dist(b, b);
    const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
    return n * m / (n + m) * (2.0 * ab - aa - bb);
}

}  // namespace

EnergyResult energy_two_sample(std::span<const std::vector<double>> a,
                               std::span<const std::vector<double>> b, int n_perm, Rng& rng,
                               std::size_t max_n) {
    if (a.empty() || b.empty()) throw ConfigError("energy_two_sample: empty sample");
    // Deterministic stride subsampling keeps the permutation cost bounded.
    auto subsample = [&](std::span<const std::vector<double>> v) {
        std::vector<std::vector<double>> out;
        const std::size_t stride = v.size() <= max_n ? 1 : (v.size() + max_n - 1) / max_n;
        for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
        return out;
    };
    const auto sa = subsample(a);
    const auto sb = subsample(b);

    const double observed = energy_stat(sa, sb);
    std::vector<std::vector<double>> pool;
    pool.reserve(sa.size() + sb.size());
    pool.insert(pool.end(), sa.begin(), sa.end());
    pool.insert(pool.end(), sb.begin(), sb.end());

    int ge = 0;
    for (int p = 0; p < n_perm; ++p) {
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.next_u64() % i]);
        const std::span<const std::vector<double>> pa(pool.data(), sa.size());
        const std::span<const std::vector<double>> pb(pool.data() + sa.size(), sb.size());
        if (energy_stat(pa, pb) >= observed) ++ge;
    }
    return {observed, (1.0 + ge) / (1.0 + n_perm)};
}

}  // namespace ergomix::stats
