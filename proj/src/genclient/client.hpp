#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "genclient/backend.hpp"
#include "genclient/cache.hpp"

namespace vp {

// Wraps a backend with the retry policy and the response cache.
//
// A completion is attempted at most config.max_retries times. Retryable
// backend failures and empty responses are retried after an exponentially
// growing, jittered delay; non-retryable failures surface immediately. Only
// nonempty responses are cached. Concurrent requests for the same key are
// serialized so the backend sees at most one call per key.
class GenClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  GenClient(std::shared_ptr<TextBackend> backend, BackendConfig config,
            std::shared_ptr<DiskCache> cache = nullptr);

  // Renders the template and completes it. `temperature` defaults to the
  // configured one. Throws kBackendUnavailable, kEmptyResponse,
  // kMissingFixture, kUnboundPlaceholder.
  std::string complete(TemplateId id, const Bindings& bindings, int sample_index = 0,
                       std::optional<double> temperature = std::nullopt);

  CacheKey cache_key(const CompletionRequest& request) const;

  const BackendConfig& config() const noexcept { return config_; }
  const TextBackend& backend() const noexcept { return *backend_; }
  std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

  // Replaces the sleep used between attempts (tests pass a no-op).
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

 private:
  std::string call_with_retries(const CompletionRequest& request);

  std::shared_ptr<TextBackend> backend_;
  BackendConfig config_;
  std::shared_ptr<DiskCache> cache_;
  KeyedMutex key_locks_;
  Sleeper sleeper_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace vp
