#include "genclient/backend.hpp"

#include <cstdlib>

#include <httplib.h>

#include "core/digest.hpp"
#include "core/text.hpp"
#include "store/records.hpp"

using nlohmann::json;

namespace vp {

std::string_view backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kChatHttp: return "chat_http";
    case BackendKind::kFixtureFile: return "fixture_file";
    case BackendKind::kMock: return "mock";
  }
  return "mock";
}

BackendKind backend_kind_from_name(std::string_view name) {
  if (name == "chat_http") return BackendKind::kChatHttp;
  if (name == "fixture_file") return BackendKind::kFixtureFile;
  if (name == "mock") return BackendKind::kMock;
  throw Error(ErrorCode::kConfig, "unknown backend kind: " + std::string(name), "kind");
}

void BackendConfig::validate(const std::string& prefix) const {
  auto field = [&prefix](const char* name) { return prefix.empty() ? name : prefix + "." + name; };
  if (kind == BackendKind::kChatHttp && (!endpoint_url || endpoint_url->empty())) {
    throw Error(ErrorCode::kConfig, "chat_http backend requires endpoint_url", field("endpoint_url"));
  }
  if (kind == BackendKind::kFixtureFile && !fixture_path) {
    throw Error(ErrorCode::kConfig, "fixture_file backend requires fixture_path", field("fixture_path"));
  }
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::kConfig, "temperature must be >= 0", field("temperature"));
  }
  if (max_retries < 1) throw Error(ErrorCode::kConfig, "max_retries must be >= 1", field("max_retries"));
  if (timeout_ms < 1) throw Error(ErrorCode::kConfig, "timeout_ms must be >= 1", field("timeout_ms"));
}

json backend_config_to_json(const BackendConfig& c) {
  json j{{"kind", backend_kind_name(c.kind)},
         {"model_name", c.model_name},
         {"temperature", c.temperature},
         {"max_retries", c.max_retries},
         {"timeout_ms", c.timeout_ms},
         {"retry_base_delay_ms", c.retry_base_delay_ms},
         {"api_key_env", c.api_key_env},
         {"multimodal", c.multimodal}};
  j["endpoint_url"] = c.endpoint_url ? json(*c.endpoint_url) : json(nullptr);
  j["fixture_path"] = c.fixture_path ? json(c.fixture_path->string()) : json(nullptr);
  j["video_url_template"] = c.video_url_template ? json(*c.video_url_template) : json(nullptr);
  return j;
}

BackendConfig backend_config_from_json(const json& j, BackendConfig c, const std::string& prefix) {
  auto field = [&prefix](const char* name) { return prefix.empty() ? name : prefix + "." + name; };
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "backend config must be an object", prefix);
  try {
    if (j.contains("kind")) c.kind = backend_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("endpoint_url")) {
      c.endpoint_url = j.at("endpoint_url").is_null()
                           ? std::nullopt
                           : std::optional(j.at("endpoint_url").get<std::string>());
    }
    if (j.contains("model_name")) c.model_name = j.at("model_name").get<std::string>();
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("max_retries")) c.max_retries = j.at("max_retries").get<int>();
    if (j.contains("timeout_ms")) c.timeout_ms = j.at("timeout_ms").get<int>();
    if (j.contains("retry_base_delay_ms")) c.retry_base_delay_ms = j.at("retry_base_delay_ms").get<int>();
    if (j.contains("api_key_env")) c.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("fixture_path")) {
      c.fixture_path = j.at("fixture_path").is_null()
                           ? std::nullopt
                           : std::optional<std::filesystem::path>(j.at("fixture_path").get<std::string>());
    }
    if (j.contains("multimodal")) c.multimodal = j.at("multimodal").get<bool>();
    if (j.contains("video_url_template")) {
      c.video_url_template = j.at("video_url_template").is_null()
                                 ? std::nullopt
                                 : std::optional(j.at("video_url_template").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "bad backend config: " + std::string(e.what()), prefix);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what(), field("kind"));
  }
  return c;
}

std::string MockBackend::complete(const CompletionRequest& request) {
  auto binding = [&request](const char* key) {
    auto it = request.bindings.find(key);
    return it == request.bindings.end() ? std::string() : it->second;
  };
  const std::string i = std::to_string(request.sample_index);
  switch (request.template_id) {
    case TemplateId::kAttributes: return "mock-attr-1:" + binding("class-name");
    case TemplateId::kDescription: return "mock-desc:" + binding("class-name");
    case TemplateId::kHierarchy: return "mock-parent: " + binding("class-names") + "\nother:";
    case TemplateId::kCaptionAugment: return "mock-cap-" + i + ":" + binding("input caption");
    case TemplateId::kVideoDescription: return "mock-vdesc-" + i + ":" + binding(kVideoIdBinding);
    case TemplateId::kBasePrompt:
    case TemplateId::kContextPrompt: return request.prompt;
  }
  return {};
}

FixtureBackend::FixtureBackend(const std::filesystem::path& path, std::string model_name)
    : model_(std::move(model_name)) {
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = path.string() + "[" + std::to_string(i) + "]";
    try {
      if (r.contains("video_id")) {
        by_video_[r.at("video_id").get<std::string>()] =
            r.at("descriptions").get<std::vector<std::string>>();
        continue;
      }
      std::vector<std::string> responses;
      if (r.contains("responses")) responses = r.at("responses").get<std::vector<std::string>>();
      else responses.push_back(r.at("response").get<std::string>());
      std::string digest = r.contains("prompt_digest") ? r.at("prompt_digest").get<std::string>()
                                                        : sha256_hex(r.at("prompt").get<std::string>());
      by_digest_[std::move(digest)] = std::move(responses);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, where + ": " + e.what(), where);
    }
  }
}

std::string FixtureBackend::complete(const CompletionRequest& request) {
  const auto index = static_cast<std::size_t>(request.sample_index);
  if (request.template_id == TemplateId::kVideoDescription) {
    auto vid = request.bindings.find(kVideoIdBinding);
    const std::string id = vid == request.bindings.end() ? std::string() : vid->second;
    auto it = by_video_.find(id);
    if (it == by_video_.end()) {
      throw Error(ErrorCode::kMissingFixture, "no fixture descriptions for video " + id, id);
    }
    if (index >= it->second.size()) {
      throw Error(ErrorCode::kMissingFixture,
                  "fixture for video " + id + " has only " + std::to_string(it->second.size()) +
                      " descriptions",
                  id);
    }
    return it->second[index];
  }
  auto it = by_digest_.find(sha256_hex(request.prompt));
  if (it == by_digest_.end() || it->second.empty()) {
    throw Error(ErrorCode::kMissingFixture, "no fixture response for prompt: " + request.prompt);
  }
  return it->second[std::min(index, it->second.size() - 1)];
}

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const std::size_t path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

ChatHttpBackend::ChatHttpBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
}

json ChatHttpBackend::request_body(const CompletionRequest& request) const {
  json content = request.prompt;
  if (request.template_id == TemplateId::kVideoDescription && config_.video_url_template) {
    auto vid = request.bindings.find(kVideoIdBinding);
    const std::string url = render(*config_.video_url_template,
                                   {{kVideoIdBinding, vid == request.bindings.end() ? "" : vid->second}});
    content = json::array({json{{"type", "text"}, {"text", request.prompt}},
                           json{{"type", "video_url"}, {"video_url", {{"url", url}}}}});
  }
  return json{{"model", config_.model_name},
              {"temperature", request.temperature},
              {"messages", json::array({json{{"role", "user"}, {"content", std::move(content)}}})}};
}

std::string ChatHttpBackend::complete(const CompletionRequest& request) {
  const auto [base, prefix] = split_endpoint(*config_.endpoint_url);
  httplib::Client client(base);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = request_body(request).dump();
  auto res = client.Post(prefix + "/v1/chat/completions", headers, body, "application/json");
  if (!res) {
    throw BackendError("transport failure reaching " + base + ": " + httplib::to_string(res.error()),
                       true);
  }
  if (res->status == 429 || res->status >= 500) {
    throw BackendError("backend returned HTTP " + std::to_string(res->status), true, res->status);
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError("backend rejected request with HTTP " + std::to_string(res->status), false,
                       res->status);
  }
  try {
    const json j = json::parse(res->body);
    const json& content = j.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError("malformed chat completion response: " + std::string(e.what()), false,
                       res->status);
  }
}

std::shared_ptr<TextBackend> make_backend(const BackendConfig& config) {
  config.validate();
  switch (config.kind) {
    case BackendKind::kMock: return std::make_shared<MockBackend>();
    case BackendKind::kFixtureFile:
      return std::make_shared<FixtureBackend>(*config.fixture_path, config.model_name);
    case BackendKind::kChatHttp: return std::make_shared<ChatHttpBackend>(config);
  }
  return std::make_shared<MockBackend>();
}

}  // namespace vp
