#include "videoprompter/videoprompter.h"

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/errors.hpp"
#include "eval/eval.hpp"
#include "fusion/fusion.hpp"
#include "pipeline/commands.hpp"
#include "pipeline/config.hpp"
#include "store/store.hpp"

using nlohmann::json;

struct vp_store {
  vp::EmbeddingStore store;
};

struct vp_context {
  std::string result;
};

namespace {

constexpr const char* kVersion = "1.0.0";

thread_local std::string last_error;

// vp_status mirrors vp::ErrorCode shifted by one (VP_OK = 0).
vp_status status_of(vp::ErrorCode code) { return static_cast<vp_status>(static_cast<int>(code) + 1); }

vp_status fail(const std::exception& e) {
  last_error = vp::error_json(e).dump();
  if (const auto* err = dynamic_cast<const vp::Error*>(&e)) return status_of(err->code());
  return VP_INTERNAL_ERROR;
}

template <typename Fn>
vp_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return VP_OK;
  } catch (const std::exception& e) {
    return fail(e);
  } catch (...) {
    last_error = R"({"error":{"code":"InternalError","message":"unknown exception"},"exit_code":1})";
    return VP_INTERNAL_ERROR;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw vp::Error(vp::ErrorCode::kInvalidInput, std::string("null or empty argument: ") + what);
}

vp::Embedding embedding_of(const float* v, size_t dim) {
  require(v != nullptr && dim > 0, "vector");
  return vp::Embedding(std::vector<float>(v, v + dim));
}

std::vector<vp::Embedding> rows_of(const float* rows, size_t count, size_t dim) {
  std::vector<vp::Embedding> out;
  if (count > 0) require(rows != nullptr, "rows");
  for (size_t i = 0; i < count; ++i) out.push_back(embedding_of(rows + i * dim, dim));
  return out;
}

vp::Matrix matrix_of(const float* rows, size_t count, size_t dim) {
  require(rows != nullptr || count == 0, "rows");
  return vp::Matrix(count, dim, std::vector<float>(rows, rows + count * dim));
}

void copy_out(const vp::Embedding& e, float* out) {
  require(out != nullptr, "out");
  std::ranges::copy(e.values(), out);
}

}  // namespace

extern "C" {

const char* vp_version(void) { return kVersion; }

const char* vp_status_name(vp_status status) {
  if (status == VP_OK) return "Ok";
  if (status == VP_INTERNAL_ERROR || status < VP_OK || status > VP_INTERNAL_ERROR) return "InternalError";
  static thread_local std::string name;
  name = std::string(vp::error_code_name(static_cast<vp::ErrorCode>(static_cast<int>(status) - 1)));
  return name.c_str();
}

int vp_status_exit_code(vp_status status) {
  if (status == VP_OK) return 0;
  if (status == VP_INTERNAL_ERROR) return 1;
  return vp::is_backend_failure(static_cast<vp::ErrorCode>(static_cast<int>(status) - 1)) ? 2 : 1;
}

const char* vp_last_error_json(void) { return last_error.c_str(); }

vp_status vp_cosine(const float* a, const float* b, size_t dim, double* out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = vp::cosine(embedding_of(a, dim), embedding_of(b, dim));
  });
}

vp_status vp_normalize(const float* v, size_t dim, float* out) {
  return guarded([&] { copy_out(vp::normalize(embedding_of(v, dim)), out); });
}

vp_status vp_renorm_mean(const float* rows, size_t count, size_t dim, float* out) {
  return guarded([&] { copy_out(vp::renorm_mean(rows_of(rows, count, dim)), out); });
}

vp_status vp_store_write(const char* dir, const char* const* ids, const float* rows, size_t count, size_t dim) {
  return guarded([&] {
    require(dir != nullptr && (ids != nullptr || count == 0), "dir/ids");
    std::vector<std::string> id_list;
    for (size_t i = 0; i < count; ++i) {
      require(ids[i] != nullptr, "id");
      id_list.emplace_back(ids[i]);
    }
    vp::write_store(dir, id_list, matrix_of(rows, count, dim));
  });
}

vp_status vp_store_open(const char* dir, vp_store** out) {
  return guarded([&] {
    require(dir != nullptr && out != nullptr, "dir/out");
    *out = new vp_store{vp::read_store(dir)};
  });
}

void vp_store_close(vp_store* store) { delete store; }

size_t vp_store_count(const vp_store* store) { return store ? store->store.size() : 0; }

size_t vp_store_dim(const vp_store* store) { return store ? store->store.dim() : 0; }

const char* vp_store_id(const vp_store* store, size_t index) {
  if (!store || index >= store->store.size()) return nullptr;
  return store->store.ids()[index].c_str();
}

vp_status vp_store_find(const vp_store* store, const char* id, size_t* index) {
  return guarded([&] {
    require(store != nullptr && id != nullptr && index != nullptr, "store/id/index");
    *index = store->store.index_of(id);
  });
}

const float* vp_store_row(const vp_store* store, size_t index) {
  if (!store || index >= store->store.size()) return nullptr;
  return store->store.row(index).data();
}

vp_status vp_filter_descriptions(const float* video, const float* desc_rows, size_t n_desc, size_t dim,
                                 size_t k, size_t* out_indices, size_t* out_count) {
  return guarded([&] {
    require(out_indices != nullptr && out_count != nullptr, "out");
    const auto kept = vp::filter_descriptions(embedding_of(video, dim), rows_of(desc_rows, n_desc, dim), k);
    std::ranges::copy(kept, out_indices);
    *out_count = kept.size();
  });
}

vp_status vp_enhance_visual(const float* video, const float* desc_rows, size_t n_desc, size_t dim,
                            const char* config_json, float* out, double* beta2_used) {
  return guarded([&] {
    vp::FusionConfig cfg;
    if (config_json && *config_json) {
      json j;
      try {
        j = json::parse(config_json);
      } catch (const json::exception& e) {
        throw vp::Error(vp::ErrorCode::kConfig, std::string("fusion config is not JSON: ") + e.what(), "fusion");
      }
      cfg = vp::fusion_config_from_json(j, cfg);
    }
    const auto fused = vp::enhance_visual(embedding_of(video, dim), rows_of(desc_rows, n_desc, dim), cfg);
    copy_out(fused.vector, out);
    if (beta2_used) *beta2_used = fused.beta2_used;
  });
}

vp_status vp_classify(const float* video, const float* class_rows, size_t n_classes, size_t dim,
                      size_t* out_index, double* out_score) {
  return guarded([&] {
    require(out_index != nullptr, "out_index");
    vp::ClassifierMatrix m;
    std::vector<std::string> names;
    for (size_t i = 0; i < n_classes; ++i) names.push_back(std::to_string(i));
    if (n_classes > 0) m.classes = vp::make_class_list(names);
    m.rows = matrix_of(class_rows, n_classes, dim);
    const auto p = vp::classify("", embedding_of(video, dim).values(), m);
    *out_index = p.class_index;
    if (out_score) *out_score = p.score;
  });
}

vp_status vp_recall_at_k(const float* queries, size_t n_queries, const float* gallery, size_t n_gallery,
                         size_t dim, const size_t* truth, const size_t* ks, size_t n_ks, double* out) {
  return guarded([&] {
    require(truth != nullptr && ks != nullptr && out != nullptr, "truth/ks/out");
    const auto r = vp::recall_at_k(matrix_of(queries, n_queries, dim), matrix_of(gallery, n_gallery, dim),
                                   std::span(truth, n_queries), std::span(ks, n_ks));
    for (size_t j = 0; j < n_ks; ++j) out[j] = r.at(ks[j]);
  });
}

vp_status vp_time_consistency(const float* videos, const float* attractors, const float* distractors,
                              size_t count, size_t dim, double* out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = vp::time_consistency(matrix_of(videos, count, dim), matrix_of(attractors, count, dim),
                                matrix_of(distractors, count, dim))
               .score();
  });
}

vp_context* vp_context_create(void) { return new vp_context{}; }

void vp_context_destroy(vp_context* ctx) { delete ctx; }

vp_status vp_run(vp_context* ctx, const char* command, const char* options_json) {
  return guarded([&] {
    require(ctx != nullptr && command != nullptr, "ctx/command");
    json options = json::object();
    if (options_json && *options_json) {
      try {
        options = json::parse(options_json);
      } catch (const json::exception& e) {
        throw vp::Error(vp::ErrorCode::kConfig, std::string("options are not JSON: ") + e.what(), "options");
      }
    }
    ctx->result = vp::execute(command, options).dump();
  });
}

const char* vp_last_result_json(const vp_context* ctx) { return ctx ? ctx->result.c_str() : ""; }

}  // extern "C"
