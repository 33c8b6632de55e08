#include "classifier/embedder.hpp"

#include <algorithm>
#include <random>

#include <httplib.h>

#include "core/digest.hpp"
#include "core/errors.hpp"
#include "core/random.hpp"
#include "genclient/backend.hpp"

using nlohmann::json;

namespace vp {

Embedding TextEmbedder::embed_one(const std::string& text) {
  const std::string texts[] = {text};
  return embed(texts).embedding(0);
}

Matrix normalize_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Embedding e = normalize(m.row(i));
    std::ranges::copy(e.values(), out.row(i).begin());
  }
  return out;
}

MockTextEmbedder::MockTextEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw Error(ErrorCode::kConfig, "mock embedder dim must be positive", "embedder.dim");
}

MockTextEmbedder::MockTextEmbedder(std::size_t dim, std::uint64_t seed, const EmbeddingStore& overrides)
    : MockTextEmbedder(dim, seed) {
  if (overrides.size() > 0 && overrides.dim() != dim) {
    throw Error(ErrorCode::kDimMismatch, "override store dim " + std::to_string(overrides.dim()) +
                                             " differs from embedder dim " + std::to_string(dim));
  }
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    set_override(overrides.ids()[i], overrides.embedding(i));
  }
}

void MockTextEmbedder::set_override(const std::string& text, const Embedding& v) {
  if (v.dim() != dim_) throw Error(ErrorCode::kDimMismatch, "override has wrong dimension");
  overrides_.insert_or_assign(text, normalize(v));
}

Embedding MockTextEmbedder::hashed(const std::string& text) const {
  const auto digest = sha256(text);
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed_),
                                   static_cast<std::uint32_t>(seed_ >> 32)};
  for (std::size_t i = 0; i < digest.size(); i += 4) {
    words.push_back(std::uint32_t{digest[i]} | (std::uint32_t{digest[i + 1]} << 8) |
                    (std::uint32_t{digest[i + 2]} << 16) | (std::uint32_t{digest[i + 3]} << 24));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::mt19937_64 rng(seq);
  return random_unit(rng, dim_);
}

Matrix MockTextEmbedder::embed(std::span<const std::string> texts) {
  Matrix out(texts.size(), dim_);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto it = overrides_.find(texts[i]);
    const Embedding e = it != overrides_.end() ? it->second : hashed(texts[i]);
    std::ranges::copy(e.values(), out.row(i).begin());
  }
  return out;
}

std::string MockTextEmbedder::id() const {
  return "mock:dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) +
         ",overrides=" + std::to_string(overrides_.size());
}

StoreTextEmbedder::StoreTextEmbedder(EmbeddingStore store, std::string label)
    : store_(std::move(store)), label_(std::move(label)) {}

Matrix StoreTextEmbedder::embed(std::span<const std::string> texts) {
  Matrix out(texts.size(), store_.dim());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto row = store_.find(texts[i]);
    if (!row) throw Error(ErrorCode::kEmbedder, "no precomputed embedding for text: " + texts[i]);
    std::ranges::copy(store_.row(*row), out.row(i).begin());
  }
  return normalize_rows(out);
}

HttpTextEmbedder::HttpTextEmbedder(std::string endpoint, std::size_t batch_size, int timeout_ms,
                                   std::optional<std::size_t> expected_dim)
    : endpoint_(std::move(endpoint)),
      batch_size_(std::max<std::size_t>(1, batch_size)),
      timeout_ms_(timeout_ms),
      dim_(expected_dim) {}

std::size_t HttpTextEmbedder::dim() const {
  if (!dim_) {
    // Probe once to learn the dimension.
    auto* self = const_cast<HttpTextEmbedder*>(this);
    const std::string probe[] = {"a photo of a"};
    self->embed_batch(probe);
  }
  return *dim_;
}

Matrix HttpTextEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) return Matrix(0, dim());
  std::vector<Matrix> parts;
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    parts.push_back(embed_batch(texts.subspan(start, std::min(batch_size_, texts.size() - start))));
  }
  const std::size_t d = parts.front().cols();
  Matrix out(texts.size(), d);
  std::size_t row = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.rows(); ++i, ++row) std::ranges::copy(p.row(i), out.row(row).begin());
  }
  return out;
}

Matrix HttpTextEmbedder::embed_batch(std::span<const std::string> texts) {
  const auto [base, prefix] = split_endpoint(endpoint_);
  httplib::Client client(base);
  const auto timeout = std::chrono::milliseconds(timeout_ms_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  const json body{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  auto res = client.Post(prefix + "/embed", body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kEmbedder, "embedder unreachable at " + base + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kEmbedder, "embedder returned HTTP " + std::to_string(res->status));
  }
  try {
    const json j = json::parse(res->body);
    const auto d = j.at("dim").get<std::size_t>();
    const auto& rows = j.at("embeddings");
    if (rows.size() != texts.size()) {
      throw Error(ErrorCode::kEmbedder, "embedder returned " + std::to_string(rows.size()) +
                                            " rows for " + std::to_string(texts.size()) + " texts");
    }
    if (dim_ && *dim_ != d) {
      throw Error(ErrorCode::kEmbedder, "embedder dim changed from " + std::to_string(*dim_) +
                                            " to " + std::to_string(d));
    }
    Matrix out(texts.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto v = rows[i].get<std::vector<float>>();
      if (v.size() != d) throw Error(ErrorCode::kEmbedder, "embedding row has wrong dimension");
      std::ranges::copy(v, out.row(i).begin());
    }
    dim_ = d;
    return normalize_rows(out);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kEmbedder, "malformed /embed response: " + std::string(e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmbedder) throw;
    throw Error(ErrorCode::kEmbedder, std::string("bad /embed row: ") + e.what());
  }
}

void EmbedderConfig::validate(const std::string& prefix) const {
  if (kind == EmbedderKind::kStore && !store) {
    throw Error(ErrorCode::kConfig, "store embedder requires a store path", prefix + ".store");
  }
  if (kind == EmbedderKind::kHttp && (!endpoint_url || endpoint_url->empty())) {
    throw Error(ErrorCode::kConfig, "http embedder requires endpoint_url", prefix + ".endpoint_url");
  }
  if (kind == EmbedderKind::kMock && dim == 0) {
    throw Error(ErrorCode::kConfig, "mock embedder dim must be positive", prefix + ".dim");
  }
}

json embedder_config_to_json(const EmbedderConfig& c) {
  const char* kind = c.kind == EmbedderKind::kMock ? "mock" : c.kind == EmbedderKind::kStore ? "store" : "http";
  json j{{"kind", kind}, {"dim", c.dim}, {"seed", c.seed}, {"batch_size", c.batch_size},
         {"timeout_ms", c.timeout_ms}};
  j["store"] = c.store ? json(c.store->string()) : json(nullptr);
  j["overrides"] = c.overrides ? json(c.overrides->string()) : json(nullptr);
  j["endpoint_url"] = c.endpoint_url ? json(*c.endpoint_url) : json(nullptr);
  return j;
}

EmbedderConfig embedder_config_from_json(const json& j, EmbedderConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "embedder config must be an object", "embedder");
  try {
    if (j.contains("kind")) {
      const auto k = j.at("kind").get<std::string>();
      if (k == "mock") c.kind = EmbedderKind::kMock;
      else if (k == "store") c.kind = EmbedderKind::kStore;
      else if (k == "http") c.kind = EmbedderKind::kHttp;
      else throw Error(ErrorCode::kConfig, "unknown embedder kind: " + k, "embedder.kind");
    }
    if (j.contains("dim")) c.dim = j.at("dim").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("timeout_ms")) c.timeout_ms = j.at("timeout_ms").get<int>();
    auto opt_path = [&j](const char* key, std::optional<std::filesystem::path>& out) {
      if (!j.contains(key)) return;
      if (j.at(key).is_null()) out.reset();
      else out = j.at(key).get<std::string>();
    };
    opt_path("store", c.store);
    opt_path("overrides", c.overrides);
    if (j.contains("endpoint_url")) {
      if (j.at("endpoint_url").is_null()) c.endpoint_url.reset();
      else c.endpoint_url = j.at("endpoint_url").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "bad embedder config: " + std::string(e.what()), "embedder");
  }
  return c;
}

std::shared_ptr<TextEmbedder> make_embedder(const EmbedderConfig& c) {
  c.validate();
  switch (c.kind) {
    case EmbedderKind::kMock:
      if (c.overrides) return std::make_shared<MockTextEmbedder>(c.dim, c.seed, read_store(*c.overrides));
      return std::make_shared<MockTextEmbedder>(c.dim, c.seed);
    case EmbedderKind::kStore:
      return std::make_shared<StoreTextEmbedder>(read_store(*c.store), c.store->filename().string());
    case EmbedderKind::kHttp:
      return std::make_shared<HttpTextEmbedder>(*c.endpoint_url, c.batch_size, c.timeout_ms);
  }
  return std::make_shared<MockTextEmbedder>(c.dim, c.seed);
}

}  // namespace vp
