#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "secfuse/simulation.hpp"

namespace secfuse {

/// Loads a scenario file (JSON, or TOML for a `.toml` extension or any file
/// not starting with `{`). Sections: system, sensors, attacks, estimator,
/// montecarlo; a top-level `scenario` string starts from a built-in scenario
/// and the sections override it. The result has passed prepare_scenario().
ScenarioConfig parse_config(const std::filesystem::path& path);

/// Same as parse_config for an already parsed document. Relative attack
/// trace paths resolve against `base_dir`.
ScenarioConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Every effective value of a validated config, defaults filled in. Feeding
/// the result back through config_from_json reproduces the config.
nlohmann::json effective_config(const ScenarioConfig& cfg);

/// Accepts a built-in scenario name or a path to a scenario file.
ScenarioConfig load_scenario(const std::string& name_or_path);

}  // namespace secfuse
