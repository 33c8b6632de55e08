#include "pipeline/config.hpp"

#include <cstdlib>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "eval/ablation.hpp"
#include "core/text.hpp"
#include "store/fs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vp {

namespace {

constexpr const char* kPathRoles[] = {"classes",     "videos",      "labels",   "descriptors",
                                      "hierarchy",   "classifier",  "fused",    "descriptions",
                                      "captions",    "attractors",  "distractors", "pairs",
                                      "grid",        "from"};
constexpr const char* kArgKeys[] = {"video", "class"};

fs::path resolve_path(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
}

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfig, std::string("bad value for ") + key, key);
  }
}

bool parse_bool(const std::string& s, const char* field) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off" || s.empty()) return false;
  throw Error(ErrorCode::kConfig, "expected a boolean for " + std::string(field), field);
}

}  // namespace

std::string_view run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::kAction: return "action";
    case RunMode::kRetrieval: return "retrieval";
    case RunMode::kTime: return "time";
  }
  return "action";
}

RunMode run_mode_from_name(std::string_view name) {
  if (name == "action") return RunMode::kAction;
  if (name == "retrieval") return RunMode::kRetrieval;
  if (name == "time") return RunMode::kTime;
  throw Error(ErrorCode::kConfig, "unknown mode: " + std::string(name), "mode");
}

RunConfig::RunConfig() : workers(default_workers()) {
  text_llm.kind = BackendKind::kChatHttp;
  text_llm.endpoint_url = "http://127.0.0.1:8000";
  text_llm.model_name = "gpt-3.5-turbo";
  text_llm.temperature = 0.2;
  video_llm.kind = BackendKind::kChatHttp;
  video_llm.endpoint_url = "http://127.0.0.1:8001";
  video_llm.model_name = "video-chatgpt";
  video_llm.temperature = 0.5;
  video_llm.multimodal = true;
  video_llm.video_url_template = "file://{video-id}";
  embedder.kind = EmbedderKind::kHttp;
  embedder.endpoint_url = "http://127.0.0.1:8080";
  components = {Component::kBase, Component::kContext, Component::kAttributes, Component::kDescription};
}

std::optional<fs::path> RunConfig::path(const std::string& role) const {
  auto it = paths.find(role);
  if (it == paths.end()) return std::nullopt;
  return it->second;
}

json fusion_config_to_json(const FusionConfig& c) {
  return {{"beta1", c.beta1},
          {"beta2_mode", c.beta2_mode == Beta2Mode::kFixed ? "fixed" : "cosine"},
          {"fixed_beta2", c.fixed_beta2},
          {"clamp_negative", c.clamp_negative},
          {"filter_k", c.filter_k},
          {"filtering", c.filtering_enabled},
          {"aggregate", aggregate_name(c.aggregate)}};
}

FusionConfig fusion_config_from_json(const json& j, FusionConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "fusion config must be an object", "fusion");
  try {
    if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2_mode")) {
      const auto m = j.at("beta2_mode").get<std::string>();
      if (m == "cosine") c.beta2_mode = Beta2Mode::kCosine;
      else if (m == "fixed") c.beta2_mode = Beta2Mode::kFixed;
      else throw Error(ErrorCode::kConfig, "unknown beta2_mode: " + m, "fusion.beta2_mode");
    }
    if (j.contains("fixed_beta2")) c.fixed_beta2 = j.at("fixed_beta2").get<double>();
    if (j.contains("clamp_negative")) c.clamp_negative = j.at("clamp_negative").get<bool>();
    if (j.contains("filter_k")) c.filter_k = j.at("filter_k").get<std::size_t>();
    if (j.contains("filtering")) c.filtering_enabled = j.at("filtering").get<bool>();
    if (j.contains("beta2")) apply_beta2_setting(j.at("beta2").get<std::string>(), c);
    if (j.contains("aggregate")) c.aggregate = aggregate_from_name(j.at("aggregate").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "bad fusion config: " + std::string(e.what()), "fusion");
  }
  c.validate();
  return c;
}

void apply_config_layer(RunConfig& c, const json& layer, const fs::path& base_dir) {
  if (!layer.is_object()) throw Error(ErrorCode::kConfig, "configuration must be a JSON object", "config");
  for (const auto& [key, value] : layer.items()) {
    if (value.is_null()) continue;
    if (key == "config") continue;
    if (key == "mode") c.mode = run_mode_from_name(get_field<std::string>(layer, "mode"));
    else if (key == "out") c.out = resolve_path(base_dir, get_field<std::string>(layer, "out"));
    else if (key == "cache_dir") c.cache_dir = resolve_path(base_dir, get_field<std::string>(layer, "cache_dir"));
    else if (key == "workers") {
      const auto w = get_field<long long>(layer, "workers");
      if (w < 1) throw Error(ErrorCode::kConfig, "workers must be >= 1", "workers");
      c.workers = static_cast<std::size_t>(w);
    } else if (key == "mock") c.mock = get_field<bool>(layer, "mock");
    else if (key == "text_llm" || key == "video_llm") {
      BackendConfig& b = key == "text_llm" ? c.text_llm : c.video_llm;
      b = backend_config_from_json(value, b, key);
      if (b.fixture_path) b.fixture_path = resolve_path(base_dir, b.fixture_path->string());
    }
    else if (key == "embedder") {
      c.embedder = embedder_config_from_json(value, c.embedder);
      for (auto* p : {&c.embedder.store, &c.embedder.overrides}) {
        if (*p) *p = resolve_path(base_dir, (*p)->string());
      }
    } else if (key == "fusion") c.fusion = fusion_config_from_json(value, c.fusion);
    else if (key == "components") {
      if (value.is_array()) c.components = parse_components(join(get_field<std::vector<std::string>>(layer, "components"), ","));
      else c.components = parse_components(get_field<std::string>(layer, "components"));
    } else if (key == "n_desc") c.n_desc = get_field<int>(layer, "n_desc");
    else if (key == "n_captions") c.n_captions = get_field<int>(layer, "n_captions");
    else if (key == "top_m") c.top_m = get_field<std::size_t>(layer, "top_m");
    else if (key == "dataset") {
      if (!value.is_object()) throw Error(ErrorCode::kConfig, "dataset must be an object", "dataset");
      apply_config_layer(c, value, base_dir);
    } else if (std::ranges::find(kPathRoles, key) != std::end(kPathRoles)) {
      c.paths[key] = resolve_path(base_dir, get_field<std::string>(layer, key.c_str()));
    } else if (std::ranges::find(kArgKeys, key) != std::end(kArgKeys)) {
      c.args[key] = get_field<std::string>(layer, key.c_str());
    } else {
      throw Error(ErrorCode::kConfig, "unknown configuration key: " + key, key);
    }
  }
}

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v) return std::nullopt;
  return std::string(v);
}

RunConfig resolve_config(const json& options, EnvLookup env) {
  if (!options.is_object()) throw Error(ErrorCode::kConfig, "options must be a JSON object", "options");
  RunConfig c;
  if (options.contains("config") && !options.at("config").is_null()) {
    const fs::path file = get_field<std::string>(options, "config");
    if (!fs::exists(file)) throw Error(ErrorCode::kConfig, "config file not found: " + file.string(), "config");
    json layer;
    try {
      layer = json::parse(read_file(file));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kConfig, "config file is not valid JSON: " + std::string(e.what()), "config");
    }
    apply_config_layer(c, layer, file.parent_path());
  }

  if (auto v = env("VP_CACHE_DIR"); v && !v->empty()) c.cache_dir = *v;
  if (auto v = env("VP_OUT"); v && !v->empty()) c.out = *v;
  if (auto v = env("VP_MODE"); v && !v->empty()) c.mode = run_mode_from_name(*v);
  if (auto v = env("VP_MOCK")) c.mock = parse_bool(*v, "VP_MOCK");
  if (auto v = env("VP_WORKERS"); v && !v->empty()) {
    try {
      const long long w = std::stoll(*v);
      if (w < 1) throw std::out_of_range(*v);
      c.workers = static_cast<std::size_t>(w);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "VP_WORKERS must be a positive integer", "VP_WORKERS");
    }
  }
  if (auto v = env("VP_TEXT_LLM_URL"); v && !v->empty()) c.text_llm.endpoint_url = *v;
  if (auto v = env("VP_TEXT_LLM_MODEL"); v && !v->empty()) c.text_llm.model_name = *v;
  if (auto v = env("VP_VIDEO_LLM_URL"); v && !v->empty()) c.video_llm.endpoint_url = *v;
  if (auto v = env("VP_VIDEO_LLM_MODEL"); v && !v->empty()) c.video_llm.model_name = *v;
  if (auto v = env("VP_EMBEDDER_URL"); v && !v->empty()) c.embedder.endpoint_url = *v;

  json flags = options;
  flags.erase("config");
  apply_config_layer(c, flags, {});

  if (c.mock) {
    c.text_llm.kind = BackendKind::kMock;
    c.text_llm.model_name = "mock";
    c.video_llm.kind = BackendKind::kMock;
    c.video_llm.model_name = "mock";
    if (c.embedder.kind == EmbedderKind::kHttp) c.embedder.kind = EmbedderKind::kMock;
  }
  if (c.n_desc < 1) throw Error(ErrorCode::kConfig, "n_desc must be >= 1", "n_desc");
  if (c.n_captions < 0) throw Error(ErrorCode::kConfig, "n_captions must be >= 0", "n_captions");
  c.fusion.validate();
  return c;
}

json RunConfig::to_json() const {
  json p = json::object();
  for (const auto& [k, v] : paths) p[k] = v.string();
  return {{"mode", run_mode_name(mode)},
          {"out", out.string()},
          {"cache_dir", cache_path().string()},
          {"workers", workers},
          {"mock", mock},
          {"text_llm", backend_config_to_json(text_llm)},
          {"video_llm", backend_config_to_json(video_llm)},
          {"embedder", embedder_config_to_json(embedder)},
          {"fusion", fusion_config_to_json(fusion)},
          {"components", component_names(components)},
          {"n_desc", n_desc},
          {"n_captions", n_captions},
          {"top_m", top_m},
          {"paths", p},
          {"args", args}};
}

}  // namespace vp
