#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/embedding.hpp"

namespace vp {

inline constexpr int kStoreVersion = 1;
inline constexpr const char* kStoreDtype = "f32le";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kDataFile = "data.bin";

// Rows flagged l2_normalized must be unit within this tolerance.
inline constexpr double kStoreUnitTolerance = 1e-4;

struct StoreManifest {
  int version = kStoreVersion;
  std::size_t dim = 0;
  std::size_t count = 0;
  std::string dtype = kStoreDtype;
  bool l2_normalized = false;
  std::vector<std::string> ids;
};

// An id-addressed collection of embeddings: `manifest.json` plus a headerless
// row-major little-endian binary32 `data.bin`. Row i belongs to ids[i].
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(StoreManifest manifest, Matrix data);

  const StoreManifest& manifest() const noexcept { return manifest_; }
  const Matrix& matrix() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.rows(); }
  std::size_t dim() const noexcept { return manifest_.dim; }
  const std::vector<std::string>& ids() const noexcept { return manifest_.ids; }

  bool contains(const std::string& id) const { return index_.contains(id); }
  // Throws kUnknownId.
  std::size_t index_of(const std::string& id) const;
  std::optional<std::size_t> find(const std::string& id) const;

  std::span<const float> row(std::size_t i) const { return data_.row(i); }
  std::span<const float> row(const std::string& id) const { return data_.row(index_of(id)); }
  Embedding embedding(std::size_t i) const { return data_.embedding(i); }
  Embedding embedding(const std::string& id) const { return data_.embedding(index_of(id)); }

 private:
  StoreManifest manifest_;
  Matrix data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Writes to a sibling temporary directory and renames it into place. The
// manifest's l2_normalized flag is set when every row is unit within
// kUnitTolerance. Throws kDuplicateId, kRaggedMatrix, kNonFinite, kIo.
void write_store(const std::filesystem::path& dir, const std::vector<std::string>& ids,
                 const Matrix& rows);
void write_store(const std::filesystem::path& dir, const std::vector<std::string>& ids,
                 std::span<const Embedding> rows);

// Throws kIo, kSchema, kUnsupportedVersion, kCorruptStore.
EmbeddingStore read_store(const std::filesystem::path& dir);

// Encodes/decodes binary32 little-endian regardless of host byte order.
std::vector<unsigned char> encode_f32le(std::span<const float> values);
std::vector<float> decode_f32le(std::span<const unsigned char> bytes);

}  // namespace vp
