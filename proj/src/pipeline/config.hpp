#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "classifier/classifier.hpp"
#include "classifier/embedder.hpp"
#include "core/types.hpp"
#include "genclient/backend.hpp"

namespace vp {

enum class RunMode { kAction, kRetrieval, kTime };

std::string_view run_mode_name(RunMode m);
RunMode run_mode_from_name(std::string_view name);

// Fully resolved settings of one command invocation.
struct RunConfig {
  RunMode mode = RunMode::kAction;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> cache_dir;  // default <out>/cache
  std::size_t workers = 1;
  bool mock = false;

  BackendConfig text_llm;
  BackendConfig video_llm;
  EmbedderConfig embedder;
  FusionConfig fusion;
  ComponentSet components;

  int n_desc = 10;     // descriptions generated per video
  int n_captions = 2;  // paraphrases per retrieval caption
  std::size_t top_m = 5;

  // Dataset and artifact references by role: classes, videos, labels,
  // descriptors, hierarchy, classifier, fused, descriptions, captions,
  // attractors, distractors, pairs, grid, from.
  std::map<std::string, std::filesystem::path> paths;
  // Scalar command arguments: video, class.
  std::map<std::string, std::string> args;

  RunConfig();

  std::filesystem::path cache_path() const { return cache_dir ? *cache_dir : out / "cache"; }
  std::optional<std::filesystem::path> path(const std::string& role) const;

  nlohmann::json to_json() const;
};

nlohmann::json fusion_config_to_json(const FusionConfig& c);
FusionConfig fusion_config_from_json(const nlohmann::json& j, FusionConfig base);

// Applies one configuration layer. Relative paths resolve against `base_dir`.
void apply_config_layer(RunConfig& config, const nlohmann::json& layer,
                        const std::filesystem::path& base_dir);

// defaults < config file (options["config"]) < VP_* environment < options.
// `env` looks up an environment variable. Throws kConfig.
using EnvLookup = std::optional<std::string> (*)(const char*);
RunConfig resolve_config(const nlohmann::json& options, EnvLookup env);

std::optional<std::string> process_env(const char* name);

}  // namespace vp
