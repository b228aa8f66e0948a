#pragma once

// The model probability space: random piecewise-linear spike functions with
// renewal breakpoints and i.i.d. integer marks, the translation action on
// them, and the exact AR(1) Ornstein-Uhlenbeck path sampler.

#include <cstdint>
#include <vector>

#include "ergomix/errors.hpp"
#include "ergomix/rng.hpp"

#include <json.hpp>

namespace ergomix {

/// Spike function: breakpoints s_{2j} (even indices), one positive integer
/// mark per gap [s_{2j}, s_{2j+2}] attached to the gap's left breakpoint.
/// Gap indices run over [j_min, j_max] with j_min <= -1 <= 0 <= j_max, the
/// gap j = -1 straddling the origin: s_{-2} < 0 <= s_0.
class ModelFunction {
  public:
    ModelFunction(std::vector<double> breakpoints, std::vector<std::uint32_t> heights, int j_min,
                  double window);

    int j_min() const { return j_min_; }
    int j_max() const { return j_min_ + static_cast<int>(heights_.size()) - 1; }
    double window() const { return window_; }
    bool window_shrunk() const { return shrunk_; }

    /// Breakpoint s_{2j}, defined for j in [j_min, j_max + 1].
    double s(int j) const;
    /// Mark of gap [s_{2j}, s_{2j+2}], defined for j in [j_min, j_max].
    std::uint32_t height(int j) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<std::uint32_t>& heights() const { return heights_; }

    /// Enforces all structural invariants; throws on violation.
    void validate() const;

  private:
    friend ModelFunction shift_model(const ModelFunction&, double);
    std::vector<double> breakpoints_;
    std::vector<std::uint32_t> heights_;
    int j_min_ = 0;
    double window_ = 0.0;
    bool shrunk_ = false;
};

/// Height distribution and threshold sequence, with the certified
/// log-product of the beta factors.
struct MeasureParams {
    std::vector<double> p;      // p[j-1] = P(height = j), truncated support
    std::vector<double> p_cdf;  // running sums of p
    std::string p_kind;         // "geometric" | "explicit" | "degenerate"
    double p_ratio = 0.5;       // geometric ratio (when p_kind == "geometric")

    std::int64_t threshold_scale = 2;  // N_j = scale * j * (j+1)
    std::int64_t threshold(int j) const;

    double beta_log_sum = 0.0;        // certified sum of log beta_j
    double beta_log_remainder = 0.0;  // bound on the dropped tail of that sum

    /// Partial sum of log beta_l over l >= from (used by support certificates).
    double beta_log_tail(int from) const;

    nlohmann::json to_json() const;
};

/// p_j = 2^{-j} (support capped at 64 and renormalized), N_j = 2 j (j+1).
MeasureParams default_measure_params();

/// Geometric height law with the given ratio and support cap.
MeasureParams geometric_measure_params(double ratio, int support_cap,
                                       std::int64_t threshold_scale);

/// Explicit height weights (normalized); rejects a vanishing first weight.
MeasureParams explicit_measure_params(std::vector<double> weights, std::int64_t threshold_scale);

/// Point mass at a single height (test sampler).
MeasureParams degenerate_measure_params(std::uint32_t height, std::int64_t threshold_scale);

/// Same height law with a rescaled threshold schedule, re-certified.
MeasureParams with_threshold_scale(const MeasureParams& base, std::int64_t threshold_scale);

/// Validates a threshold gap sequence: N_{n+2}-N_{n+1} > N_{n+1}-N_n.
void validate_threshold_gaps(std::span<const std::int64_t> thresholds);

/// Stationary sample: the gap holding the origin is drawn length-biased with
/// the origin placed uniformly inside it, all other gaps i.i.d. Uniform(1/2,
/// 3/2), marks i.i.d. with law p, generation extending one gap beyond the
/// requested window on each side.
ModelFunction sample_model(const MeasureParams& params, double t_win, Rng& rng);

/// Near-origin pattern used by the full-support experiments.
struct HPattern {
    std::uint32_t center_height = 1;  // mark of gap [s_0, s_2]
    double eps = 0.125;               // s_0 ~ U[0,eps], s_2 ~ U[1,1+eps]
};

/// Sample with the near-origin gaps/marks forced to the pattern: the mark of
/// gap 0 is center_height, marks of gaps 0 < |k| <= N_n are 1, and beyond
/// that marks are drawn from p conditioned on the level envelope (height <=
/// 2l for N_l < |k| <= N_{l+1}).  Positions outside [s_0, s_2] are standard.
ModelFunction sample_model_h_conditioned(const MeasureParams& params, double t_win,
                                         const HPattern& pattern, Rng& rng);

/// Translation by t with gap indices relabeled so the straddling-origin
/// invariant holds; the covered window shrinks by |t| and is flagged.
ModelFunction shift_model(const ModelFunction& f, double t);

/// Piecewise-linear evaluation: spikes of height n_j at breakpoints, zeros at
/// gap midpoints.
double eval_model(const ModelFunction& f, double x);

nlohmann::json model_to_json(const ModelFunction& f);
ModelFunction model_from_json(const nlohmann::json& j);

/// Stationary Gaussian paths with covariance exp(-|t-s|), sampled by the
/// exact AR(1) recursion along the grid.  Rows are paths.
std::vector<std::vector<double>> ou_process_sample(std::span<const double> grid,
                                                   std::size_t n_paths, Rng& rng);

}  // namespace ergomix
