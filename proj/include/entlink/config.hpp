#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "entlink/engine.hpp"

namespace entlink {

/// Canonical JSON form. Quantities are written as plain SI numbers so that a
/// parse of the output reproduces the config exactly.
nlohmann::json to_json(const ExperimentConfig& config);

/// Parses the config tree. Fields may be SI numbers or unit-suffixed strings
/// ("6.9us", "16.1kHz"); absent fields keep their defaults. Throws ConfigError
/// with one entry per bad field.
ExperimentConfig config_from_json(const nlohmann::json& tree);

ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

}  // namespace entlink
