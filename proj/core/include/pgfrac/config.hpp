#pragma once

#include <map>
#include <string>

#include "pgfrac/driver.hpp"

namespace pgfrac {

/// Structured key-value configuration: [section] headers, key = value lines,
/// '#' comments. Unknown sections or keys are rejected with their full path.
struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static ConfigFile parse(const std::string& text);
  static ConfigFile parse_file(const std::string& path);
};

/// Builds a runnable problem; validates the schema and value ranges.
/// base_dir resolves relative mesh paths.
Problem build_problem(const ConfigFile& cfg, const std::string& base_dir = ".");

Problem load_problem(const std::string& config_path);

}  // namespace pgfrac
