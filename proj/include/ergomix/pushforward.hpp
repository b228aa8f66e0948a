#pragma once

// The factor map from model functions to semigroup states, its truncation
// calibration through backward/forward orbit tail probes, and sampling of
// the pushforward measure.

#include <optional>
#include <utility>

#include "ergomix/modelspace.hpp"
#include "ergomix/rng.hpp"
#include "ergomix/semigroup.hpp"

namespace ergomix {

struct LevelTail {
    int level = 0;
    double position = 0.0;   // probes run over compacts in [position, position + delta]
    double probe = 0.0;      // max measured tail norm at this level
    int max_basic = 0;       // height envelope applied (basics <= max_basic)
};

struct TruncationPlan {
    int J = 40;                 // gaps |j| <= J are retained
    double tail_bound = 0.0;    // certified bound on the dropped tail norm
    double target_tol = 1e-3;
    bool met_target = true;
    std::vector<LevelTail> per_level_tails;

    double window() const { return std::max(4.0 * J, 64.0); }

    /// Sum of the measured level probes from the given level on, with a
    /// geometric extension past the last measurement: an upper estimate for
    /// the payload of envelope-constrained marks beyond threshold(level).
    double level_tail_sum(int from_level) const;

    nlohmann::json to_json() const;
    static TruncationPlan from_json(const nlohmann::json& j);
};

struct ProbeOptions {
    double delta = 8.0;      // compacts live in [N, N + delta]
    int max_subintervals = 3;
};

/// Monte Carlo surrogate for the tail condition: the max over randomized
/// unions of subintervals of [N, N+delta] (the full interval included) of
/// the norms of the forward and backward orbit integrals of basic(n).
double pettis_tail_probe(const FHCSystem& system, int n, double N, int n_compacts, Rng& rng,
                         const ProbeOptions& opt = {});

/// Chooses the threshold schedule so the level tail probes (with the height
/// envelope: basics up to 2l at level l) fall below base^-(l+1), then fixes
/// the working truncation.  When forced_J is given the truncation index is
/// fixed and the achieved tail is recorded (met_target reflects target_tol);
/// otherwise failing to reach target_tol within the level cap throws
/// CalibrationError carrying the achieved tail.  The returned params carry
/// the re-certified beta product for the calibrated thresholds.  Only the
/// summability of the tail schedule matters downstream, so its base is a
/// knob.
std::pair<MeasureParams, TruncationPlan> calibrate_truncation(
    const FHCSystem& system, MeasureParams params, double target_tol, Rng& rng,
    std::optional<int> forced_J = std::nullopt, double tail_schedule_base = 2.0);

/// Factor map: the sum over retained gaps of the orbit-segment integrals
/// with the basic indexed by the gap's mark, the central gap split at 0.
StateVector phi(const ModelFunction& f, const FHCSystem& system, const TruncationPlan& plan);

/// || T_a(phi(f)) - phi(f shifted by a) ||; bounded by twice the plan's tail
/// bound plus quadrature slack.
double equivariance_residual(const ModelFunction& f, double a, const FHCSystem& system,
                             const TruncationPlan& plan);

/// One draw from the truncated pushforward measure.
StateVector sample_invariant(const FHCSystem& system, const MeasureParams& params,
                             const TruncationPlan& plan, Rng& rng);

}  // namespace ergomix
