#pragma once

// Small statistics toolbox: two-sample Kolmogorov-Smirnov, chi-square
// goodness of fit, Holm correction, bootstrap bands, energy-distance test.
// Everything is hand-rolled on top of the deterministic Rng so that reports
// are bit-reproducible across platforms.

#include <cstddef>
#include <span>
#include <vector>

#include "ergomix/rng.hpp"

namespace ergomix::stats {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value with the
/// usual finite-sample correction of the effective sample size.  Ties are
/// processed jointly, so identical multisets give a statistic of exactly 0.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Survival function of the Kolmogorov distribution.
double kolmogorov_q(double lambda);

/// Regularized upper incomplete gamma function Q(a, x).
double gamma_q(double a, double x);

/// Upper-tail probability of a chi-square variable with df degrees of freedom.
double chi2_sf(double x, double df);

struct Chi2Result {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Pearson goodness-of-fit against expected counts (caller pools rare bins).
Chi2Result chi2_gof(std::span<const double> observed, std::span<const double> expected);

/// Holm step-down: true iff any hypothesis is rejected at family level alpha.
bool holm_any_rejected(std::vector<double> p_values, double alpha);

struct Summary {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};
Summary summarize(std::span<const double> v);

double pearson_corr(std::span<const double> a, std::span<const double> b);

struct CovEstimate {
    double cov = 0.0;
    double bootstrap_sd = 0.0;
};

/// Sample covariance of paired observations with a bootstrap standard error.
CovEstimate cov_with_bootstrap(std::span<const double> a, std::span<const double> b, int n_boot,
                               Rng& rng);

struct EnergyResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample energy-distance permutation test on d-dimensional points.
/// Sides larger than max_n are deterministically subsampled first.
EnergyResult energy_two_sample(std::span<const std::vector<double>> a,
                               std::span<const std::vector<double>> b, int n_perm, Rng& rng,
                               std::size_t max_n = 2000);

}  // namespace ergomix::stats
