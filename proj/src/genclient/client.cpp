#include "genclient/client.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "core/text.hpp"

namespace vp {

GenClient::GenClient(std::shared_ptr<TextBackend> backend, BackendConfig config,
                     std::shared_ptr<DiskCache> cache)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      cache_(std::move(cache)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

CacheKey GenClient::cache_key(const CompletionRequest& request) const {
  std::string prompt = request.prompt;
  // Video-to-text prompts are identical across videos; the video reference
  // is part of the request identity.
  if (auto it = request.bindings.find(kVideoIdBinding); it != request.bindings.end()) {
    prompt += "\n[video:" + it->second + "]";
  }
  return CacheKey{std::string(backend_kind_name(backend_->kind())),
                  backend_->model_name(),
                  std::string(template_name(request.template_id)),
                  request.template_version,
                  std::move(prompt),
                  request.temperature,
                  request.sample_index};
}

std::string GenClient::complete(TemplateId id, const Bindings& bindings, int sample_index,
                                std::optional<double> temperature) {
  CompletionRequest request;
  request.template_id = id;
  request.template_version = prompt_template(id).version;
  request.bindings = bindings;
  request.prompt = render_prompt(id, bindings);
  request.temperature = temperature.value_or(config_.temperature);
  request.sample_index = sample_index;

  if (!cache_) return call_with_retries(request);

  const CacheKey key = cache_key(request);
  auto guard = key_locks_.lock(key.digest());
  if (auto hit = cache_->get(key)) {
    ++cache_hits_;
    return *hit;
  }
  std::string response = call_with_retries(request);
  cache_->put(key, response);
  return response;
}

std::string GenClient::call_with_retries(const CompletionRequest& request) {
  const int attempts = std::max(1, config_.max_retries);
  std::mt19937 jitter_rng(std::random_device{}());
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  std::string last_failure;
  bool last_was_empty = false;

  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const double base = config_.retry_base_delay_ms * std::pow(2.0, attempt - 1);
      const double capped = std::min(base, 30000.0);
      sleeper_(std::chrono::milliseconds(static_cast<long long>(capped * jitter(jitter_rng))));
    }
    ++backend_calls_;
    try {
      std::string response = trim(backend_->complete(request));
      if (!response.empty()) return response;
      last_was_empty = true;
      last_failure = "backend returned an empty response";
    } catch (const BackendError& e) {
      if (!e.retryable()) throw;
      last_was_empty = false;
      last_failure = e.what();
    }
  }
  if (last_was_empty) {
    throw Error(ErrorCode::kEmptyResponse,
                "empty response after " + std::to_string(attempts) + " attempts for " +
                    std::string(template_name(request.template_id)) + " prompt");
  }
  throw Error(ErrorCode::kBackendUnavailable,
              "backend unavailable after " + std::to_string(attempts) + " attempts: " + last_failure);
}

}  // namespace vp
