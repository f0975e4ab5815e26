// JSON configuration: parsing with strict unknown-key rejection, default
// materialization, round-trippable resolved output, and dotted-path
// addressing for parameter sweeps.
#pragma once

#include <json.hpp>

#include <string>

#include "fedsim/engine.hpp"

namespace fedsim {

// Validates and fills defaults; throws ConfigError naming the offending
// key. Unknown keys anywhere in the document are rejected.
FederationConfig parse_config(const nlohmann::json& doc);

FederationConfig load_config_file(const std::string& path);

// Full config echo with every default materialized; parse_config on this
// output reproduces the same FederationConfig.
nlohmann::json resolved_config(const FederationConfig& cfg);

// Writes `value` at a dotted path like "compression.topk"; the path must
// already exist in the resolved schema.
void set_by_dotted_path(nlohmann::json& doc, const std::string& path,
                        const nlohmann::json& value);

}  // namespace fedsim
