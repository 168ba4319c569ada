#pragma once

#include "dagledger/experiment.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace dagledger {

/// Builds a config from a JSON document (schema in docs/config-schema.md).
/// Missing fields take the experiment's defaults. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json &doc);
ExperimentConfig load_config(const std::filesystem::path &path);

/// Default configuration for an experiment kind.
ExperimentConfig default_config(ExperimentKind kind);

nlohmann::json config_to_json(const ExperimentConfig &config);

SimParams sim_params_from_json(const nlohmann::json &j, SimParams defaults);

} // namespace dagledger
