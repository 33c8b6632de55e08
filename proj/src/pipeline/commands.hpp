#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pipeline/config.hpp"

namespace vp {

// "descriptors gen", "hierarchy gen", "videodesc gen", "classifier build",
// "fuse", "classify", "retrieve", "time-eval", "explain", "ablate".
const std::vector<std::string>& command_names();

// Runs one command with a resolved configuration and returns its summary
// ({"command", "artifacts", ...}). Every run also writes <out>/run.json and
// <out>/runs/<command>.json. Throws Error.
nlohmann::json run_command(const std::string& command, const RunConfig& config);

// resolve_config followed by run_command.
nlohmann::json execute(const std::string& command, const nlohmann::json& options,
                       EnvLookup env = process_env);

// Process exit status for an error: 2 for backend failures, 1 otherwise.
int exit_code_for(const std::exception& e);
// {"error": {"code", "message", "field"?}, "exit_code"}.
nlohmann::json error_json(const std::exception& e);

}  // namespace vp
