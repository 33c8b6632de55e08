#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include <json.hpp>

namespace vp {

struct CacheKey {
  std::string backend_kind;
  std::string model_name;
  std::string template_id;
  int template_version = 0;
  std::string prompt;  // rendered prompt plus any video reference
  double temperature = 0.0;
  int sample_index = 0;

  nlohmann::json to_json() const;
  // SHA-256 over the canonical JSON form; any differing field changes it.
  std::string digest() const;
};

// Content-addressed response cache: <dir>/<first 2 hex>/<digest>.json.
// Writes go through a temp file and rename, so concurrent readers see either
// nothing or a complete entry.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path dir);

  std::optional<std::string> get(const CacheKey& key);
  void put(const CacheKey& key, const std::string& response);

  std::filesystem::path path_for(const std::string& digest) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }

 private:
  std::filesystem::path dir_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

// One mutex per key, created on demand.
class KeyedMutex {
 public:
  std::unique_lock<std::mutex> lock(const std::string& key);

 private:
  std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace vp
