#include "ergomix/report.hpp"

namespace ergomix {

bool ExperimentReport::all_passed() const {
    if (invalid) return false;
    for (const auto& v : verdicts)
        if (!v.passed) return false;
    return true;
}

nlohmann::json ExperimentReport::to_json_deterministic() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["instance"] = instance;
    j["params_hash"] = params_hash;
    j["seed"] = seed;
    j["n_samples"] = n_samples;
    j["invalid"] = invalid;
    nlohmann::json es = nlohmann::json::array();
    for (const auto& e : estimates)
        es.push_back({{"name", e.name},
                      {"value", e.value},
                      {"ci_lo", e.ci_lo},
                      {"ci_hi", e.ci_hi},
                      {"n", e.n}});
    j["estimates"] = std::move(es);
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : tests)
        ts.push_back({{"name", t.name}, {"statistic", t.statistic}, {"p_value", t.p_value}});
    j["tests"] = std::move(ts);
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : verdicts)
        vs.push_back({{"criterion", v.criterion}, {"threshold", v.threshold}, {"passed", v.passed}});
    j["verdicts"] = std::move(vs);
    j["extra"] = extra;
    j["config"] = resolved_config;
    return j;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j = to_json_deterministic();
    j["timing"] = {{"wall_clock_ms", wall_clock_ms}, {"workers", workers}};
    return j;
}

}  // namespace ergomix
