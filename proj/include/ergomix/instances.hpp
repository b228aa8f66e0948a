#pragma once

// Instance registry: construction from JSON parameter blocks plus the
// metadata the CLI lists (parameter schema and the enforced condition).

#include <functional>
#include <string>
#include <vector>

#include "ergomix/semigroup.hpp"

namespace ergomix {

struct InstanceInfo {
    std::string name;
    std::string description;
    std::string condition;  // parameter condition enforced at construction
    nlohmann::json param_schema;
    std::function<InstanceBundle(const nlohmann::json&)> make;
};

/// Stable-ordered registry of the shipped instances.
const std::vector<InstanceInfo>& instance_registry();

/// Builds an instance from {name, params}; unknown names and unknown or
/// ill-typed parameter keys are configuration errors, violated mathematical
/// conditions are parameter errors citing the condition.
InstanceBundle make_instance(const std::string& name, const nlohmann::json& params);

}  // namespace ergomix
