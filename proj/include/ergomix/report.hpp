#pragma once

// Serializable record of a statistical experiment.  The wall clock lives in
// a separate "timing" object so reports can be compared byte-for-byte across
// worker counts.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ergomix {

struct Estimate {
    std::string name;
    double value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;
};

struct TestStat {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
};

struct Verdict {
    std::string criterion;
    double threshold = 0.0;
    bool passed = false;
};

struct ExperimentReport {
    std::string experiment;
    std::string instance;
    std::string params_hash;
    std::uint64_t seed = 0;
    int workers = 1;  // recorded under "timing"; results never depend on it
    std::size_t n_samples = 0;
    std::vector<Estimate> estimates;
    std::vector<TestStat> tests;
    std::vector<Verdict> verdicts;
    nlohmann::json extra = nlohmann::json::object();
    nlohmann::json resolved_config = nlohmann::json::object();
    bool invalid = false;
    double wall_clock_ms = 0.0;

    bool all_passed() const;

    /// Full JSON including the "timing" object.
    nlohmann::json to_json() const;

    /// JSON with the "timing" object removed (determinism comparisons).
    nlohmann::json to_json_deterministic() const;
};

}  // namespace ergomix
