#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "core/errors.hpp"
#include "genclient/prompts.hpp"

namespace vp {

enum class BackendKind { kChatHttp, kFixtureFile, kMock };

std::string_view backend_kind_name(BackendKind kind);
BackendKind backend_kind_from_name(std::string_view name);

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  std::optional<std::string> endpoint_url;
  std::string model_name = "mock";
  double temperature = 0.2;
  int max_retries = 3;  // total attempts per completion
  int timeout_ms = 60000;
  int retry_base_delay_ms = 500;
  std::string api_key_env = "VP_API_KEY";
  std::optional<std::filesystem::path> fixture_path;
  // chat_http only: the endpoint accepts video input, referenced through
  // video_url_template with {video-id} substituted.
  bool multimodal = false;
  std::optional<std::string> video_url_template;

  // Throws kConfig (field-named) when the combination is invalid.
  void validate(const std::string& field_prefix = {}) const;
};

nlohmann::json backend_config_to_json(const BackendConfig& c);
// Missing keys keep the values already in `base`.
BackendConfig backend_config_from_json(const nlohmann::json& j, BackendConfig base,
                                       const std::string& field_prefix = {});

// Extra binding carrying the video reference for video-to-text requests; not
// a template placeholder.
inline constexpr const char* kVideoIdBinding = "video-id";

struct CompletionRequest {
  TemplateId template_id = TemplateId::kAttributes;
  int template_version = 1;
  Bindings bindings;
  std::string prompt;  // rendered template
  double temperature = 0.0;
  int sample_index = 0;
};

// Failure reported by a backend. Retryable failures (transport errors, HTTP
// 5xx and 429) may be attempted again; others fail immediately.
class BackendError : public Error {
 public:
  BackendError(const std::string& message, bool retryable, int http_status = 0)
      : Error(ErrorCode::kBackendUnavailable, message),
        retryable_(retryable),
        http_status_(http_status) {}
  bool retryable() const noexcept { return retryable_; }
  int http_status() const noexcept { return http_status_; }

 private:
  bool retryable_;
  int http_status_;
};

// A text-generating backend: one completion per call.
class TextBackend {
 public:
  virtual ~TextBackend() = default;
  // May throw BackendError or Error(kMissingFixture).
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual BackendKind kind() const = 0;
  virtual std::string model_name() const = 0;
  virtual bool accepts_video() const = 0;
};

// Deterministic stand-in; the output is a pure function of the template,
// bindings and sample index.
class MockBackend final : public TextBackend {
 public:
  std::string complete(const CompletionRequest& request) override;
  BackendKind kind() const override { return BackendKind::kMock; }
  std::string model_name() const override { return "mock"; }
  bool accepts_video() const override { return true; }
};

// Recorded responses from a JSONL file. Lines are either
//   {"video_id": ..., "descriptions": [...]}            (video-to-text)
//   {"prompt": ..., "response": ... | "responses": [...]} (text-to-text)
//   {"prompt_digest": <sha256 hex of prompt>, "response"/"responses": ...}
class FixtureBackend final : public TextBackend {
 public:
  FixtureBackend(const std::filesystem::path& path, std::string model_name);
  std::string complete(const CompletionRequest& request) override;
  BackendKind kind() const override { return BackendKind::kFixtureFile; }
  std::string model_name() const override { return model_; }
  bool accepts_video() const override { return true; }

 private:
  std::string model_;
  std::map<std::string, std::vector<std::string>> by_video_;
  std::map<std::string, std::vector<std::string>> by_digest_;
};

// OpenAI-compatible chat completions over HTTP(S):
// POST {endpoint}/v1/chat/completions, bearer token from env[api_key_env].
class ChatHttpBackend final : public TextBackend {
 public:
  explicit ChatHttpBackend(BackendConfig config);
  std::string complete(const CompletionRequest& request) override;
  BackendKind kind() const override { return BackendKind::kChatHttp; }
  std::string model_name() const override { return config_.model_name; }
  bool accepts_video() const override { return config_.multimodal; }

  nlohmann::json request_body(const CompletionRequest& request) const;

 private:
  BackendConfig config_;
};

std::shared_ptr<TextBackend> make_backend(const BackendConfig& config);

// Splits "http://host:port/base" into {"http://host:port", "/base"}.
std::pair<std::string, std::string> split_endpoint(const std::string& url);

}  // namespace vp
