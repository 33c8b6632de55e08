#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/embedding.hpp"
#include "store/store.hpp"

namespace vp {

// Maps texts to unit rows of a fixed dimension. Implementations are
// deterministic per text. Failures throw Error(kEmbedder).
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual Matrix embed(std::span<const std::string> texts) = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string id() const = 0;
  // False when batch calls must not overlap.
  virtual bool concurrent() const { return true; }

  Embedding embed_one(const std::string& text);
};

// Hermetic embedder: each text hashes to a pseudo-random unit vector.
// Texts listed in `overrides` map to the given vectors instead, which lets
// fixtures pin the geometry of specific prompts.
class MockTextEmbedder final : public TextEmbedder {
 public:
  explicit MockTextEmbedder(std::size_t dim, std::uint64_t seed = 0);
  MockTextEmbedder(std::size_t dim, std::uint64_t seed, const EmbeddingStore& overrides);

  void set_override(const std::string& text, const Embedding& v);

  Matrix embed(std::span<const std::string> texts) override;
  std::size_t dim() const override { return dim_; }
  std::string id() const override;

  Embedding hashed(const std::string& text) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::map<std::string, Embedding> overrides_;
};

// Precomputed embeddings keyed by the exact text.
class StoreTextEmbedder final : public TextEmbedder {
 public:
  explicit StoreTextEmbedder(EmbeddingStore store, std::string label = "store");
  Matrix embed(std::span<const std::string> texts) override;
  std::size_t dim() const override { return store_.dim(); }
  std::string id() const override { return "store:" + label_; }

 private:
  EmbeddingStore store_;
  std::string label_;
};

// POST {endpoint}/embed {"texts": [...]} -> {"dim": D, "embeddings": [[...], ...]}
class HttpTextEmbedder final : public TextEmbedder {
 public:
  HttpTextEmbedder(std::string endpoint, std::size_t batch_size, int timeout_ms,
                   std::optional<std::size_t> expected_dim = std::nullopt);
  Matrix embed(std::span<const std::string> texts) override;
  std::size_t dim() const override;
  std::string id() const override { return "http:" + endpoint_; }
  bool concurrent() const override { return false; }

 private:
  Matrix embed_batch(std::span<const std::string> texts);

  std::string endpoint_;
  std::size_t batch_size_;
  int timeout_ms_;
  mutable std::optional<std::size_t> dim_;
};

enum class EmbedderKind { kMock, kStore, kHttp };

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::kMock;
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> store;      // kStore
  std::optional<std::filesystem::path> overrides;  // kMock
  std::optional<std::string> endpoint_url;         // kHttp
  std::size_t batch_size = 64;
  int timeout_ms = 60000;

  void validate(const std::string& prefix = "embedder") const;
};

nlohmann::json embedder_config_to_json(const EmbedderConfig& c);
EmbedderConfig embedder_config_from_json(const nlohmann::json& j, EmbedderConfig base);

std::shared_ptr<TextEmbedder> make_embedder(const EmbedderConfig& c);

// Copies rows with every row renormalized; embedders funnel backend output
// through this so rows are unit to binary32 precision.
Matrix normalize_rows(const Matrix& m);

}  // namespace vp
