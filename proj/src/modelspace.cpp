#include "ergomix/modelspace.hpp"

#include <algorithm>
#include <cmath>

namespace ergomix {

ModelFunction::ModelFunction(std::vector<double> breakpoints, std::vector<std::uint32_t> heights,
                             int j_min, double window)
    : breakpoints_(std::move(breakpoints)),
      heights_(std::move(heights)),
      j_min_(j_min),
      window_(window) {
    validate();
}

double ModelFunction::s(int j) const {
    const int i = j - j_min_;
    if (i < 0 || static_cast<std::size_t>(i) >= breakpoints_.size())
        throw RangeError("breakpoint index out of range");
    return breakpoints_[static_cast<std::size_t>(i)];
}

std::uint32_t ModelFunction::height(int j) const {
    const int i = j - j_min_;
    if (i < 0 || static_cast<std::size_t>(i) >= heights_.size())
        throw RangeError("gap index out of range");
    return heights_[static_cast<std::size_t>(i)];
}

void ModelFunction::validate() const {
    if (breakpoints_.size() != heights_.size() + 1 || heights_.empty())
        throw ConfigError("model function: breakpoint/height count mismatch");
    if (j_min_ > -1) throw ConfigError("model function: straddling gap missing (j_min > -1)");
    if (j_max() < 0) throw ConfigError("model function: no gap right of the origin");
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
        const double gap = breakpoints_[i + 1] - breakpoints_[i];
        if (!(gap > 0.5 && gap < 1.5))
            throw ConfigError("model function: gap outside (1/2, 3/2)");
    }
    if (!(s(-1) < 0.0 && s(0) >= 0.0))
        throw ConfigError("model function: origin not straddled by gap -1");
    for (std::uint32_t h : heights_)
        if (h < 1) throw ConfigError("model function: height below 1");
    if (window_ < 0.0 || s(j_min_) > -window_ || s(j_max() + 1) < window_)
        throw ConfigError("model function: window not covered by breakpoints");
}

std::int64_t MeasureParams::threshold(int j) const {
    return threshold_scale * static_cast<std::int64_t>(j) * (static_cast<std::int64_t>(j) + 1);
}

double MeasureParams::beta_log_tail(int from) const {
    // log beta_j = (N_{j+1} - N_j) * log(P_j) with P_j the height-law prefix sum.
    double acc = 0.0;
    double prefix = 0.0;
    for (int j = 1; j <= static_cast<int>(p.size()); ++j) {
        prefix += p[static_cast<std::size_t>(j - 1)];
        if (j < from) continue;
        const double pj = std::min(prefix, 1.0);
        if (pj >= 1.0) break;  // remaining terms vanish
        acc += static_cast<double>(threshold(j + 1) - threshold(j)) * std::log(pj);
    }
    return acc;
}

namespace {

void certify_beta_product(MeasureParams& mp) {
    if (mp.p.empty() || !(mp.p.front() > 0.0))
        throw ParameterError("height law: p_1 must be positive (beta_1 would vanish)");
    double sum = 0.0;
    for (double v : mp.p) {
        if (v < 0.0) throw ParameterError("height law: negative mass");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("height law: masses must sum to 1");

    // Certify the log-product.  For a geometric law evaluate the untruncated
    // prefix sums so the certificate matches the ideal sequence; for explicit
    // laws the truncated prefix reaches 1 and the sum is finite outright.
    double acc = 0.0;
    double last_term = 0.0;
    int j = 1;
    for (; j <= 4096; ++j) {
        double pj;
        if (mp.p_kind == "geometric") {
            pj = 1.0 - std::pow(mp.p_ratio, j);
        } else {
            double prefix = 0.0;
            for (int i = 1; i <= j && i <= static_cast<int>(mp.p.size()); ++i)
                prefix += mp.p[static_cast<std::size_t>(i - 1)];
            pj = std::min(prefix, 1.0);
        }
        if (pj <= 0.0) throw ParameterError("height law: vanishing prefix sum");
        if (pj >= 1.0) {
            last_term = 0.0;
            break;
        }
        last_term = static_cast<double>(mp.threshold(j + 1) - mp.threshold(j)) * std::log(pj);
        acc += last_term;
        if (std::abs(last_term) < 1e-18) break;
    }
    // Tail terms shrink geometrically with the prefix deficit; twice the last
    // term over the contraction is a crude but safe cover.
    const double remainder =
        last_term == 0.0 ? 0.0 : 2.0 * std::abs(last_term) / (1.0 - (mp.p_kind == "geometric" ? mp.p_ratio : 0.5));
    if (!std::isfinite(acc) || remainder > 1e-9)
        throw ParameterError("height law: beta product certificate did not converge");
    mp.beta_log_sum = acc;
    mp.beta_log_remainder = remainder;
}

void finalize(MeasureParams& mp) {
    if (mp.threshold_scale < 1)
        throw ParameterError("thresholds: scale must be a positive integer");
    mp.p_cdf.resize(mp.p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mp.p.size(); ++i) {
        acc += mp.p[i];
        mp.p_cdf[i] = acc;
    }
    if (!mp.p_cdf.empty()) mp.p_cdf.back() = 1.0;
    certify_beta_product(mp);
}

}  // namespace

void validate_threshold_gaps(std::span<const std::int64_t> thresholds) {
    if (thresholds.size() < 3) throw ParameterError("thresholds: need at least three values");
    for (std::size_t i = 0; i + 1 < thresholds.size(); ++i)
        if (thresholds[i + 1] <= thresholds[i])
            throw ParameterError("thresholds: must strictly increase");
    for (std::size_t i = 0; i + 2 < thresholds.size(); ++i) {
        const auto g1 = thresholds[i + 1] - thresholds[i];
        const auto g2 = thresholds[i + 2] - thresholds[i + 1];
        if (g2 <= g1) throw ParameterError("thresholds: gaps must strictly increase");
    }
}

MeasureParams geometric_measure_params(double ratio, int support_cap,
                                       std::int64_t threshold_scale) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("height law: ratio must be in (0,1)");
    if (support_cap < 1) throw ParameterError("height law: support cap must be >= 1");
    MeasureParams mp;
    mp.p_kind = "geometric";
    mp.p_ratio = ratio;
    mp.threshold_scale = threshold_scale;
    mp.p.resize(static_cast<std::size_t>(support_cap));
    double mass = 0.0, w = ratio;
    for (auto& v : mp.p) {
        v = w;
        mass += w;
        w *= ratio;
    }
    for (auto& v : mp.p) v /= mass;  // renormalize the truncated tail (bias < ratio^cap)
    finalize(mp);
    return mp;
}

MeasureParams default_measure_params() { return geometric_measure_params(0.5, 64, 2); }

MeasureParams explicit_measure_params(std::vector<double> weights,
                                      std::int64_t threshold_scale) {
    MeasureParams mp;
    mp.p_kind = "explicit";
    mp.threshold_scale = threshold_scale;
    double mass = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ParameterError("height law: negative weight");
        mass += w;
    }
    if (!(mass > 0.0)) throw ParameterError("height law: zero total mass");
    for (auto& w : weights) w /= mass;
    mp.p = std::move(weights);
    finalize(mp);
    return mp;
}

MeasureParams degenerate_measure_params(std::uint32_t height, std::int64_t threshold_scale) {
    if (height < 1) throw ParameterError("height law: degenerate height must be >= 1");
    std::vector<double> w(height, 0.0);
    w[0] = height == 1 ? 1.0 : 0.0;
    if (height > 1) {
        // Keep p_1 positive so the beta certificate holds, with nearly all
        // mass at the requested height.
        w[0] = 1e-12;
        w[height - 1] = 1.0 - 1e-12;
    }
    MeasureParams mp;
    mp.p_kind = "degenerate";
    mp.threshold_scale = threshold_scale;
    mp.p = std::move(w);
    finalize(mp);
    return mp;
}

MeasureParams with_threshold_scale(const MeasureParams& base, std::int64_t threshold_scale) {
    MeasureParams mp = base;
    mp.threshold_scale = threshold_scale;
    finalize(mp);
    return mp;
}

nlohmann::json MeasureParams::to_json() const {
    return {{"p_kind", p_kind},
            {"p_ratio", p_ratio},
            {"support_cap", p.size()},
            {"threshold_scale", threshold_scale},
            {"beta_log_sum", beta_log_sum},
            {"beta_log_remainder", beta_log_remainder}};
}

namespace {

// Open-interval uniform; the structural invariants exclude the endpoints.
double uniform01_open(Rng& rng) {
    double u = rng.uniform01();
    while (u == 0.0) u = rng.uniform01();
    return u;
}

double draw_gap(Rng& rng) { return 0.5 + uniform01_open(rng); }

// Length-biased gap (density g on (1/2,3/2)) via inverse CDF.
double draw_straddling_gap(Rng& rng) {
    return std::sqrt(2.0 * uniform01_open(rng) + 0.25);
}

std::uint32_t draw_height(const MeasureParams& params, Rng& rng) {
    return static_cast<std::uint32_t>(rng.sample_cdf(params.p_cdf)) + 1;
}

// Height drawn from p conditioned on height <= cap.
std::uint32_t draw_height_capped(const MeasureParams& params, std::uint32_t cap, Rng& rng) {
    const std::size_t n = std::min<std::size_t>(cap, params.p_cdf.size());
    const double total = params.p_cdf[n - 1];
    const double u = rng.uniform01() * total;
    std::size_t lo = 0, hi = n;
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (u < params.p_cdf[mid - 1])
            hi = mid;
        else
            lo = mid;
    }
    return static_cast<std::uint32_t>(lo) + 1;
}

struct Skeleton {
    std::vector<double> breakpoints;
    int j_min = 0;
};

// Breakpoints covering [-t_win, t_win] with one spare gap on each side.
// Draw order is fixed: straddling gap, origin placement, right gaps, left gaps.
Skeleton sample_positions(double t_win, double s0_forced, double s2_forced, bool forced, Rng& rng) {
    double s_m2, s_0;
    std::vector<double> right, left;  // breakpoints beyond s_0 / below s_{-2}
    if (forced) {
        s_0 = s0_forced;
        right.push_back(s2_forced);
        double g = draw_gap(rng);
        s_m2 = s_0 - g;
    } else {
        const double g0 = draw_straddling_gap(rng);
        const double v = uniform01_open(rng);
        s_m2 = -v * g0;
        s_0 = (1.0 - v) * g0;
    }
    while (right.empty() ? s_0 < t_win + 2.0 : right.back() < t_win + 2.0) {
        const double prev = right.empty() ? s_0 : right.back();
        right.push_back(prev + draw_gap(rng));
    }
    while (left.empty() ? s_m2 > -(t_win + 2.0) : left.back() > -(t_win + 2.0)) {
        const double prev = left.empty() ? s_m2 : left.back();
        left.push_back(prev - draw_gap(rng));
    }
    Skeleton sk;
    sk.j_min = -1 - static_cast<int>(left.size());
    sk.breakpoints.reserve(left.size() + 2 + right.size());
    for (auto it = left.rbegin(); it != left.rend(); ++it) sk.breakpoints.push_back(*it);
    sk.breakpoints.push_back(s_m2);
    sk.breakpoints.push_back(s_0);
    for (double v : right) sk.breakpoints.push_back(v);
    return sk;
}

}  // namespace

ModelFunction sample_model(const MeasureParams& params, double t_win, Rng& rng) {
    if (!(t_win >= 2.0)) throw ParameterError("sample_model: window must be at least 2");
    Skeleton sk = sample_positions(t_win, 0, 0, false, rng);
    std::vector<std::uint32_t> heights(sk.breakpoints.size() - 1);
    for (auto& h : heights) h = draw_height(params, rng);
    return ModelFunction(std::move(sk.breakpoints), std::move(heights), sk.j_min, t_win);
}

ModelFunction sample_model_h_conditioned(const MeasureParams& params, double t_win,
                                         const HPattern& pattern, Rng& rng) {
    if (!(t_win >= 2.0)) throw ParameterError("sample_model: window must be at least 2");
    if (!(pattern.eps > 0.0 && pattern.eps < 0.25))
        throw ParameterError("h-pattern: eps must lie in (0, 1/4)");
    const int n = static_cast<int>(pattern.center_height);
    if (n < 1) throw ParameterError("h-pattern: center height must be >= 1");

    const double s0 = rng.uniform(0.0, pattern.eps);
    const double s2 = rng.uniform(1.0, 1.0 + pattern.eps);
    Skeleton sk = sample_positions(t_win, s0, s2, true, rng);

    const std::int64_t level_n = params.threshold(n);
    std::vector<std::uint32_t> heights(sk.breakpoints.size() - 1);
    for (std::size_t i = 0; i < heights.size(); ++i) {
        const int j = sk.j_min + static_cast<int>(i);
        const std::int64_t a = std::abs(static_cast<std::int64_t>(j));
        if (j == 0) {
            heights[i] = pattern.center_height;
        } else if (a <= level_n) {
            heights[i] = 1;
        } else {
            int l = n;
            while (params.threshold(l + 1) < a) ++l;
            heights[i] = draw_height_capped(params, static_cast<std::uint32_t>(2 * l), rng);
        }
    }
    return ModelFunction(std::move(sk.breakpoints), std::move(heights), sk.j_min, t_win);
}

ModelFunction shift_model(const ModelFunction& f, double t) {
    std::vector<double> bp(f.breakpoints().size());
    for (std::size_t i = 0; i < bp.size(); ++i) bp[i] = t + f.breakpoints()[i];

    // k = min{ j : t + s_{2j} >= 0 }; gap j of the result is old gap j + k.
    int k = f.j_max() + 1;
    for (int j = f.j_min(); j <= f.j_max() + 1; ++j)
        if (t + f.s(j) >= 0.0) {
            k = j;
            break;
        }
    if (k > f.j_max() || k - 1 < f.j_min())
        throw CoverageError("shift_model: window exhausted; sample with a larger window");

    const double left_cover = -bp.front();
    const double right_cover = bp.back();
    const double window = std::min({f.window(), left_cover, right_cover});
    if (!(window > 0.0))
        throw CoverageError("shift_model: window exhausted; sample with a larger window");

    ModelFunction out(std::move(bp), f.heights(), f.j_min() - k, window);
    out.shrunk_ = window < f.window();
    return out;
}

double eval_model(const ModelFunction& f, double x) {
    if (x < -f.window() || x > f.window())
        throw RangeError("eval_model: point outside covered window");
    const auto& bp = f.breakpoints();
    auto it = std::upper_bound(bp.begin(), bp.end(), x);
    if (it == bp.begin() || it == bp.end())
        throw RangeError("eval_model: point outside breakpoint range");
    const std::size_t gi = static_cast<std::size_t>(it - bp.begin()) - 1;
    const int j = f.j_min() + static_cast<int>(gi);
    const double lo = bp[gi], hi = bp[gi + 1];
    const double mid = 0.5 * (lo + hi);
    if (x <= mid) {
        const double hj = static_cast<double>(f.height(j));
        return hj * (1.0 - (x - lo) / (mid - lo));
    }
    if (j + 1 > f.j_max()) throw RangeError("eval_model: point beyond last sampled spike");
    const double hn = static_cast<double>(f.height(j + 1));
    return hn * (x - mid) / (hi - mid);
}

nlohmann::json model_to_json(const ModelFunction& f) {
    return {{"breakpoints", f.breakpoints()},
            {"heights", f.heights()},
            {"j_min", f.j_min()},
            {"window", f.window()}};
}

ModelFunction model_from_json(const nlohmann::json& j) {
    return ModelFunction(j.at("breakpoints").get<std::vector<double>>(),
                         j.at("heights").get<std::vector<std::uint32_t>>(),
                         j.at("j_min").get<int>(), j.at("window").get<double>());
}

std::vector<std::vector<double>> ou_process_sample(std::span<const double> grid,
                                                   std::size_t n_paths, Rng& rng) {
    if (grid.empty() || grid.front() != 0.0)
        throw ConfigError("ou_process_sample: grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ConfigError("ou_process_sample: grid must increase");
    if (n_paths < 1) throw ConfigError("ou_process_sample: need at least one path");

    std::vector<std::vector<double>> paths(n_paths, std::vector<double>(grid.size()));
    for (auto& path : paths) {
        double xi = rng.normal();
        path[0] = xi;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double h = grid[i] - grid[i - 1];
            const double a = std::exp(-h);
            xi = a * xi + std::sqrt(1.0 - a * a) * rng.normal();
            path[i] = xi;
        }
    }
    return paths;
}

}  // namespace ergomix
