#pragma once

// Batch experiment driver: config validation, plan caching, experiment
// dispatch, and report/CSV output.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergomix/report.hpp"

#include <json.hpp>

namespace ergomix {

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> output_dir;
    bool no_cache = false;
};

struct RunOutcome {
    int exit_code = 0;  // 0 pass, 1 error, 2 verdict fail
    std::vector<ExperimentReport> reports;
    std::vector<std::string> written_files;
    std::string error;
};

/// Validates the config against the versioned schema (unknown keys are
/// rejected with a pointer to the offending key) and fills in defaults.
nlohmann::json resolve_config(const nlohmann::json& config, const RunOverrides& overrides);

/// Executes the experiments in declared order; reports are written to the
/// output directory as {experiment}-{instance}-{seed}.json (curves as .csv).
/// A top-level "config" key in the input is treated as an emitted report and
/// its embedded config is re-run.
RunOutcome run_config(const nlohmann::json& config, const RunOverrides& overrides);

/// FNV-1a hash of the canonical dump, as fixed-width hex.
std::string params_hash(const nlohmann::json& j);

}  // namespace ergomix
