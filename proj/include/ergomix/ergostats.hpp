#pragma once

// Monte Carlo experiments on the pushforward measure: distributional
// invariance under the flow, mixing decay of observable correlations, full
// support through pattern-conditioned sampling, and orbit visit densities.

#include <functional>
#include <optional>

#include "ergomix/pushforward.hpp"
#include "ergomix/report.hpp"
#include "ergomix/stats.hpp"

namespace ergomix {

/// Bounded deterministic test functional on states.
struct Observable {
    std::string id;
    std::string kind;     // "bounded_functional" | "norm_radial"
    double probe_x = 0.0; // grid abscissa (grid-function renders)
    int coeff_index = 0;  // coefficient read-out (coefficient renders)
    std::optional<StateVector> center;  // norm_radial center (zero state if unset)

    /// Evaluates on a rendered (concrete) state.
    double eval(const StateVector& rendered) const;
};

/// Versioned default suite: bounded functionals with probes spread across
/// the instance's representation.
std::vector<Observable> default_observables(const FHCSystem& system, int count);

/// Shared driver state: master seed and worker count.
struct RunContext {
    std::uint64_t seed = 0;
    int workers = 1;
};

struct InvarianceConfig {
    std::vector<double> t_list{0.7, 1.3, 2.5};
    int n_observables = 5;
    std::size_t n_samples = 5000;
    double alpha = 0.01;  // Holm family level
};

/// Draws X_i from the pushforward measure and Kolmogorov-Smirnov-compares
/// the laws of phi(X_i) and phi(T_t X_i) per (t, observable); the family
/// verdict is Holm-corrected.  The two samples share draws, so t = 0 yields
/// a statistic of exactly 0.
ExperimentReport estimate_invariance(const FHCSystem& system, const MeasureParams& params,
                                     const TruncationPlan& plan, const InvarianceConfig& cfg,
                                     const RunContext& ctx);

struct MixingConfig {
    std::vector<double> t_grid;  // increasing, must include 0
    int observable_index = 0;    // phi = psi from the default suite
    std::size_t n_samples = 5000;
    int n_bootstrap = 400;
};

/// Estimates C(t) = Cov(phi(X), phi(T_t X)) with bootstrap 3-sigma bands;
/// verdict: C(0) above its null band and |C(t_max)| inside it.
ExperimentReport estimate_mixing(const FHCSystem& system, const MeasureParams& params,
                                 const TruncationPlan& plan, const MixingConfig& cfg,
                                 const RunContext& ctx);

enum class SupportMode { Unconditional, HConditioned };

struct SupportConfig {
    std::vector<int> k_targets{1, 2, 3, 5, 8};
    double radius = 0.0;  // 0 -> calibrated: 2 * median distance + tail floor
    std::size_t n_samples = 400;
    SupportMode mode = SupportMode::HConditioned;
    double eps = 0.125;
    double min_hit_rate = 0.5;
};

/// Counts samples within the radius of the targets u_k (the unit-time orbit
/// integrals of the basics); in conditioned mode the near-origin pattern is
/// forced and the analytic probability of the conditioning event is reported
/// as the positivity certificate.
ExperimentReport estimate_support(const FHCSystem& system, const MeasureParams& params,
                                  const TruncationPlan& plan, const SupportConfig& cfg,
                                  const RunContext& ctx);

struct DensityConfig {
    double horizon = 500.0;
    double dt = 0.05;
    double radius = 0.0;  // 0 -> calibrated from the starting state; inf -> whole space
};

/// Walks the orbit of a sampled state and records the visit-time fraction to
/// the ball around the zero state at horizons T/4, T/2, T.
ExperimentReport orbit_lower_density(const FHCSystem& system, const MeasureParams& params,
                                     const TruncationPlan& plan, const DensityConfig& cfg,
                                     const RunContext& ctx);

struct OuConfig {
    std::vector<double> h_grid{0.0, 0.5, 1.0, 2.0};
    std::size_t n_paths = 10000;
};

/// Correlation check of the exact AR(1) sampler against exp(-|h|).
ExperimentReport ou_check(const OuConfig& cfg, const RunContext& ctx,
                          std::vector<std::vector<double>>* paths_out = nullptr);

/// Runs fn(i) for i in [0, n) on the context's worker threads; index-sliced,
/// so results are identical for any worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace ergomix
