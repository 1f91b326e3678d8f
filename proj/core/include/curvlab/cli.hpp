#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace curvlab::cli {

// Batch front-end: a config names one command plus its parameters; run()
// executes it and renders a machine-readable report. Exit code 0 = success,
// 2 = a mathematical finding (inequality violation / verified certificate),
// 1 = operational error.
struct RunResult {
  int exit_code = 0;
  std::string report;  // rendered in the requested format
  std::string format = "json";
};

nlohmann::json load_config(const std::string& path);

/// Schema validation without execution; returns all problems found.
std::vector<std::string> validate(const nlohmann::json& config);

/// Executes a resolved config. Throws std::exception on operational errors;
/// the caller maps those to exit code 1.
RunResult run(const nlohmann::json& config);

/// Commands whose results depend on sampling and therefore require a seed.
bool command_is_stochastic(const std::string& command);

}  // namespace curvlab::cli
