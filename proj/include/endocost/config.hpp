#pragma once

#include <filesystem>

#include <json.hpp>

#include "endocost/harness.hpp"

namespace endocost {

// Strict parse: unknown keys and mistyped values raise ConfigError naming
// the dotted field path (e.g. "allocators[1].learning_rate").
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace endocost
