#include "genclient/cache.hpp"

#include "core/digest.hpp"
#include "store/fs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vp {

json CacheKey::to_json() const {
  return json{{"backend_kind", backend_kind},   {"model_name", model_name},
              {"template_id", template_id},     {"template_version", template_version},
              {"prompt", prompt},               {"temperature", temperature},
              {"sample_index", sample_index}};
}

std::string CacheKey::digest() const { return sha256_hex(to_json().dump()); }

DiskCache::DiskCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path DiskCache::path_for(const std::string& digest) const {
  return dir_ / digest.substr(0, 2) / (digest + ".json");
}

std::optional<std::string> DiskCache::get(const CacheKey& key) {
  const std::string digest = key.digest();
  const fs::path path = path_for(digest);
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    ++misses_;
    return std::nullopt;
  }
  try {
    const json j = json::parse(read_file(path));
    // A digest collision or a foreign file is treated as a miss.
    if (j.at("key") != key.to_json()) {
      ++misses_;
      return std::nullopt;
    }
    ++hits_;
    return j.at("response").get<std::string>();
  } catch (const std::exception&) {
    ++misses_;
    return std::nullopt;
  }
}

void DiskCache::put(const CacheKey& key, const std::string& response) {
  const json entry{{"key", key.to_json()}, {"response", response}};
  write_file_atomic(path_for(key.digest()), entry.dump(2) + "\n");
}

std::unique_lock<std::mutex> KeyedMutex::lock(const std::string& key) {
  std::shared_ptr<std::mutex> m;
  {
    std::lock_guard guard(mu_);
    auto& slot = locks_[key];
    if (!slot) slot = std::make_shared<std::mutex>();
    m = slot;
  }
  // The map keeps the mutex alive for the lifetime of this object.
  return std::unique_lock<std::mutex>(*m);
}

}  // namespace vp
