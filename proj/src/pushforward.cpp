#include "ergomix/pushforward.hpp"

#include <algorithm>
#include <cmath>

#include "ergomix/errors.hpp"

namespace ergomix {

double TruncationPlan::level_tail_sum(int from_level) const {
    double acc = 0.0;
    double prev = 0.0, last = 0.0;
    for (const auto& lt : per_level_tails) {
        if (lt.level < from_level) continue;
        acc += lt.probe;
        prev = last;
        last = lt.probe;
    }
    double ratio = 0.75;
    if (prev > 0.0 && last > 0.0) ratio = std::clamp(last / prev, 0.05, 0.75);
    if (last > 0.0) acc += last * ratio / (1.0 - ratio);
    return acc;
}

nlohmann::json TruncationPlan::to_json() const {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : per_level_tails)
        levels.push_back({{"level", l.level},
                          {"position", l.position},
                          {"probe", l.probe},
                          {"max_basic", l.max_basic}});
    return {{"J", J},
            {"tail_bound", tail_bound},
            {"target_tol", target_tol},
            {"met_target", met_target},
            {"per_level_tails", std::move(levels)}};
}

TruncationPlan TruncationPlan::from_json(const nlohmann::json& j) {
    TruncationPlan p;
    p.J = j.at("J").get<int>();
    p.tail_bound = j.at("tail_bound").get<double>();
    p.target_tol = j.at("target_tol").get<double>();
    p.met_target = j.at("met_target").get<bool>();
    for (const auto& l : j.at("per_level_tails"))
        p.per_level_tails.push_back({l.at("level").get<int>(), l.at("position").get<double>(),
                                     l.at("probe").get<double>(), l.at("max_basic").get<int>()});
    return p;
}

double pettis_tail_probe(const FHCSystem& system, int n, double N, int n_compacts, Rng& rng,
                         const ProbeOptions& opt) {
    if (!(N > 0.0)) throw ConfigError("pettis_tail_probe: requires N > 0");
    if (n == 1) return 0.0;

    auto union_norms = [&](std::span<const double> cuts) {
        // cuts is an even-length sorted list of subinterval endpoints.
        std::vector<StateVector> fwd, bwd;
        std::vector<cplx> ones;
        for (std::size_t i = 0; i + 1 < cuts.size(); i += 2) {
            fwd.push_back(system.orbit_segment(n, cuts[i], cuts[i + 1]));
            bwd.push_back(system.orbit_segment(n, -cuts[i + 1], -cuts[i]));
            ones.push_back(1.0);
        }
        const double f = norm(linear_combine(ones, fwd));
        const double b = norm(linear_combine(ones, bwd));
        return std::max(f, b);
    };

    // The full interval anchors the search; randomized unions explore
    // cancellation-breaking subsets.
    const double full[2] = {N, N + opt.delta};
    double best = union_norms(full);
    for (int c = 0; c < n_compacts; ++c) {
        const int m = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(
                                               opt.max_subintervals));
        std::vector<double> cuts(static_cast<std::size_t>(2 * m));
        for (auto& v : cuts) v = rng.uniform(N, N + opt.delta);
        std::sort(cuts.begin(), cuts.end());
        best = std::max(best, union_norms(cuts));
    }
    return best;
}

namespace {

// Level probe with the height envelope: basics up to min(2l, 64), windows
// covering the level's whole threshold block.
LevelTail measure_level(const FHCSystem& system, const MeasureParams& params, int level,
                        Rng& rng) {
    LevelTail lt;
    lt.level = level;
    lt.position = static_cast<double>(params.threshold(level)) / 2.0;
    lt.max_basic = static_cast<int>(std::min<std::int64_t>(std::int64_t{2} * level, 64));
    ProbeOptions opt;
    opt.delta = std::max(
        opt.delta,
        static_cast<double>(params.threshold(level + 1) - params.threshold(level)) / 2.0);
    double worst = 0.0;
    for (int m = 2; m <= lt.max_basic; ++m) {
        try {
            worst = std::max(worst, pettis_tail_probe(system, m, lt.position, 4, rng, opt));
        } catch (const DomainOverflowError&) {
            // The probe position fell outside the representable window; the
            // orbit there is not renderable, so the level is recorded as
            // unmeasurable and calibration stops extending.
            lt.probe = std::numeric_limits<double>::quiet_NaN();
            return lt;
        }
    }
    lt.probe = worst;
    return lt;
}

int level_of_gap_index(const MeasureParams& params, int j) {
    int l = 1;
    while (params.threshold(l + 1) <= j) ++l;
    return l;
}

}  // namespace

std::pair<MeasureParams, TruncationPlan> calibrate_truncation(const FHCSystem& system,
                                                              MeasureParams params,
                                                              double target_tol, Rng& rng,
                                                              std::optional<int> forced_J,
                                                              double tail_schedule_base) {
    if (!(target_tol > 0.0)) throw ConfigError("calibrate_truncation: target_tol must be positive");
    if (!(tail_schedule_base > 1.0))
        throw ConfigError("calibrate_truncation: tail schedule base must exceed 1");

    TruncationPlan plan;
    plan.target_tol = target_tol;

    if (std::isinf(target_tol) && !forced_J) {
        // Vacuous tolerance: the minimal plan, with a single measured level
        // keeping the recorded tail bound finite.
        plan.J = 1;
        LevelTail lt = measure_level(system, params, 1, rng);
        if (!std::isnan(lt.probe)) plan.per_level_tails.push_back(lt);
        plan.tail_bound = 2.0 * plan.level_tail_sum(1);
        plan.met_target = true;
        return {std::move(params), std::move(plan)};
    }

    const int max_scale_doublings = 12;
    const int level_cap = 8;

    for (int attempt = 0;; ++attempt) {
        // Measure level tails under the current threshold schedule and check
        // the geometric decay requirement base^-(l+1).
        std::vector<LevelTail> levels;
        bool schedule_ok = true;
        for (int l = 1; l <= level_cap; ++l) {
            LevelTail lt = measure_level(system, params, l, rng);
            if (std::isnan(lt.probe)) break;
            levels.push_back(lt);
            if (lt.probe > std::pow(tail_schedule_base, -(l + 1))) schedule_ok = false;
            if (lt.probe == 0.0 && l >= 2) break;  // exact zero tails; nothing further decays
        }
        if (levels.empty())
            throw CalibrationError("calibrate_truncation: no measurable level", 0.0);
        if (schedule_ok || attempt >= max_scale_doublings || forced_J) {
            if (!schedule_ok && !forced_J && attempt >= max_scale_doublings)
                throw CalibrationError("calibrate_truncation: tail schedule unreachable",
                                       levels.back().probe);
            plan.per_level_tails = std::move(levels);
            break;
        }
        params = with_threshold_scale(params, params.threshold_scale * 2);
    }

    // Doubled level-tail sum: the certified bound on the dropped gaps.
    auto tail_from = [&](int start_level) { return 2.0 * plan.level_tail_sum(start_level); };

    if (forced_J) {
        plan.J = *forced_J;
        plan.tail_bound = tail_from(level_of_gap_index(params, plan.J));
        plan.met_target = plan.tail_bound <= target_tol;
        return {std::move(params), std::move(plan)};
    }

    for (const auto& lt : plan.per_level_tails) {
        const double tail = tail_from(lt.level);
        if (tail <= target_tol) {
            plan.J = static_cast<int>(params.threshold(lt.level));
            plan.tail_bound = tail;
            plan.met_target = true;
            return {std::move(params), std::move(plan)};
        }
    }
    throw CalibrationError("calibrate_truncation: target tolerance unreachable within the level cap",
                           tail_from(plan.per_level_tails.back().level));
}

StateVector phi(const ModelFunction& f, const FHCSystem& system, const TruncationPlan& plan) {
    const int J = plan.J;
    if (f.j_min() > -J || f.j_max() < J)
        throw CoverageError("phi: model function window does not cover the retained gaps");

    std::vector<StateVector> parts;
    std::vector<cplx> ones;
    for (int j = -J; j <= J; ++j) {
        const int h = static_cast<int>(f.height(j));
        if (h == 1) continue;  // basic(1) = 0
        if (j == -1) {
            // Central gap split at the origin: backward part on [s_{-2}, 0],
            // forward part on [0, s_0].
            if (f.s(-1) < 0.0) parts.push_back(system.orbit_segment(h, f.s(-1), 0.0));
            if (f.s(0) > 0.0) parts.push_back(system.orbit_segment(h, 0.0, f.s(0)));
            while (ones.size() < parts.size()) ones.push_back(1.0);
        } else {
            parts.push_back(system.orbit_segment(h, f.s(j), f.s(j + 1)));
            ones.push_back(1.0);
        }
    }
    if (parts.empty()) return system.basic(1);
    return linear_combine(ones, parts);
}

double equivariance_residual(const ModelFunction& f, double a, const FHCSystem& system,
                             const TruncationPlan& plan) {
    if (!(a >= 0.0)) throw ConfigError("equivariance_residual: requires a >= 0");
    const StateVector lhs = system.apply_T(a, phi(f, system, plan));
    const StateVector rhs = phi(shift_model(f, a), system, plan);
    return distance(lhs, rhs);
}

StateVector sample_invariant(const FHCSystem& system, const MeasureParams& params,
                             const TruncationPlan& plan, Rng& rng) {
    const ModelFunction f = sample_model(params, plan.window(), rng);
    return phi(f, system, plan);
}

}  // namespace ergomix
