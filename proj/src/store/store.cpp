#include "store/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "core/errors.hpp"
#include "store/fs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vp {

namespace {

void check_unique(const std::vector<std::string>& ids) {
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateId, "duplicate id: " + id);
  }
}

bool all_rows_unit(const Matrix& m, double tolerance) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (std::abs(std::sqrt(squared_norm(m.row(i))) - 1.0) > tolerance) return false;
  }
  return true;
}

template <typename T>
T manifest_field(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kSchema, std::string("manifest missing field ") + key,
                std::string(".") + key);
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kSchema, std::string("manifest field has wrong type: ") + key,
                std::string(".") + key);
  }
}

}  // namespace

EmbeddingStore::EmbeddingStore(StoreManifest manifest, Matrix data)
    : manifest_(std::move(manifest)), data_(std::move(data)) {
  index_.reserve(manifest_.ids.size());
  for (std::size_t i = 0; i < manifest_.ids.size(); ++i) index_.emplace(manifest_.ids[i], i);
}

std::size_t EmbeddingStore::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::kUnknownId, "unknown id: " + id);
  return it->second;
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<unsigned char> encode_f32le(std::span<const float> values) {
  std::vector<unsigned char> out(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    out[4 * i + 0] = static_cast<unsigned char>(bits & 0xFF);
    out[4 * i + 1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
    out[4 * i + 2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
    out[4 * i + 3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
  }
  return out;
}

std::vector<float> decode_f32le(std::span<const unsigned char> bytes) {
  if (bytes.size() % 4 != 0) {
    throw Error(ErrorCode::kCorruptStore, "payload length is not a multiple of 4");
  }
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t bits = std::uint32_t{bytes[4 * i]} | (std::uint32_t{bytes[4 * i + 1]} << 8) |
                               (std::uint32_t{bytes[4 * i + 2]} << 16) |
                               (std::uint32_t{bytes[4 * i + 3]} << 24);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

void write_store(const fs::path& dir, const std::vector<std::string>& ids, const Matrix& rows) {
  if (ids.size() != rows.rows()) {
    throw Error(ErrorCode::kRaggedMatrix, "id count " + std::to_string(ids.size()) +
                                              " does not match row count " +
                                              std::to_string(rows.rows()));
  }
  check_unique(ids);
  for (float x : rows.data()) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFinite, "store rows must be finite");
  }
  if (rows.cols() == 0) {
    throw Error(ErrorCode::kInvalidInput, "store rows must have positive dimension");
  }

  json manifest = {
      {"version", kStoreVersion},
      {"dim", rows.cols()},
      {"count", rows.rows()},
      {"dtype", kStoreDtype},
      {"l2_normalized", rows.rows() > 0 && all_rows_unit(rows, kUnitTolerance)},
      {"ids", ids},
  };

  std::error_code ec;
  fs::path target = dir;
  if (!target.has_filename()) target = target.parent_path();
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path staging = staging_path(target);
  fs::create_directories(staging, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + staging.string() + ": " + ec.message());
  try {
    {
      std::ofstream m(staging / kManifestFile, std::ios::binary);
      m << manifest.dump(2) << '\n';
      if (!m) throw Error(ErrorCode::kIo, "cannot write manifest in " + staging.string());
    }
    {
      const auto bytes = encode_f32le(rows.data());
      std::ofstream d(staging / kDataFile, std::ios::binary);
      d.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!d) throw Error(ErrorCode::kIo, "cannot write payload in " + staging.string());
    }
    publish_directory(staging, target);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

void write_store(const fs::path& dir, const std::vector<std::string>& ids,
                 std::span<const Embedding> rows) {
  if (rows.empty()) {
    // An empty span carries no dimension.
    throw Error(ErrorCode::kInvalidInput, "cannot write an empty store without a dimension");
  }
  write_store(dir, ids, Matrix::from_rows(rows));
}

EmbeddingStore read_store(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestFile;
  const fs::path data_path = dir / kDataFile;
  if (!fs::exists(manifest_path)) throw Error(ErrorCode::kIo, "missing " + manifest_path.string());
  if (!fs::exists(data_path)) throw Error(ErrorCode::kIo, "missing " + data_path.string());

  json j;
  try {
    j = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, "manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "manifest must be an object", ".");

  StoreManifest m;
  m.version = manifest_field<int>(j, "version");
  if (m.version != kStoreVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported store version " + std::to_string(m.version), ".version");
  }
  m.dtype = manifest_field<std::string>(j, "dtype");
  if (m.dtype != kStoreDtype) {
    throw Error(ErrorCode::kUnsupportedVersion, "unsupported dtype " + m.dtype, ".dtype");
  }
  m.dim = manifest_field<std::size_t>(j, "dim");
  if (m.dim == 0) throw Error(ErrorCode::kSchema, "dim must be positive", ".dim");
  m.count = manifest_field<std::size_t>(j, "count");
  m.l2_normalized = manifest_field<bool>(j, "l2_normalized");
  m.ids = manifest_field<std::vector<std::string>>(j, "ids");
  if (m.ids.size() != m.count) {
    throw Error(ErrorCode::kCorruptStore, "manifest lists " + std::to_string(m.ids.size()) +
                                              " ids but count is " + std::to_string(m.count),
                ".ids");
  }
  try {
    check_unique(m.ids);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptStore, e.what(), ".ids");
  }

  const std::string raw = read_file(data_path);
  const std::size_t expected = m.count * m.dim * 4;
  if (raw.size() != expected) {
    throw Error(ErrorCode::kCorruptStore, "data.bin has " + std::to_string(raw.size()) +
                                              " bytes, manifest implies " + std::to_string(expected));
  }
  auto values = decode_f32le(
      std::span(reinterpret_cast<const unsigned char*>(raw.data()), raw.size()));
  for (float x : values) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kCorruptStore, "data.bin has a non-finite value");
  }
  Matrix data(m.count, m.dim, std::move(values));
  if (m.l2_normalized && !all_rows_unit(data, kStoreUnitTolerance)) {
    throw Error(ErrorCode::kCorruptStore, "store flagged l2_normalized has a non-unit row");
  }
  return EmbeddingStore(std::move(m), std::move(data));
}

}  // namespace vp
