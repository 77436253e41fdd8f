#pragma once

// JSON run configuration <-> SolverConfig.

#include "sdtm/driver.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace sdtm {

struct RunConfigFile {
  SolverConfig solver;
  std::string out_dir;  // optional "out_dir" entry
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the key.
RunConfigFile parse_run_config(const nlohmann::json& j);
RunConfigFile load_run_config(const std::filesystem::path& path);

/// Fills every defaulted entry (problem parameters, point counts) explicitly.
SolverConfig resolve_config(const SolverConfig& config);

/// Full config as JSON; parse_run_config(to_json(c)).solver reproduces c.
nlohmann::json to_json(const SolverConfig& config);

}  // namespace sdtm
