/* C interface to the videoprompter engine.
 *
 * Every function returning vp_status stores a JSON error description on
 * failure, retrievable with vp_last_error_json() on the same thread. Output
 * strings returned by the library stay valid until the next call on the same
 * thread (vp_last_error_json) or on the same handle. */
#ifndef VIDEOPROMPTER_H
#define VIDEOPROMPTER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VP_API __declspec(dllexport)
#else
#define VP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vp_status {
  VP_OK = 0,
  VP_INVALID_INPUT,
  VP_DIM_MISMATCH,
  VP_ZERO_VECTOR,
  VP_EMPTY_LIST,
  VP_NON_FINITE,
  VP_IO_ERROR,
  VP_RAGGED_MATRIX,
  VP_DUPLICATE_ID,
  VP_CORRUPT_STORE,
  VP_UNSUPPORTED_VERSION,
  VP_UNKNOWN_ID,
  VP_SCHEMA_ERROR,
  VP_CONFIG_ERROR,
  VP_UNBOUND_PLACEHOLDER,
  VP_BACKEND_UNAVAILABLE,
  VP_EMPTY_RESPONSE,
  VP_MISSING_FIXTURE,
  VP_DUPLICATE_ASSIGNMENT,
  VP_EMBEDDER_ERROR,
  VP_EMPTY_CLASSIFIER,
  VP_MISSING_LABEL,
  VP_EMPTY_GRID,
  VP_INTERNAL_ERROR
} vp_status;

VP_API const char* vp_version(void);
VP_API const char* vp_status_name(vp_status status);
/* 0 for VP_OK, 2 for backend failures, 1 otherwise. */
VP_API int vp_status_exit_code(vp_status status);
/* {"error": {"code", "message", "field"?}, "exit_code"} or "" after success. */
VP_API const char* vp_last_error_json(void);

/* Vector math on binary32 inputs with double accumulation. */
VP_API vp_status vp_cosine(const float* a, const float* b, size_t dim, double* out);
VP_API vp_status vp_normalize(const float* v, size_t dim, float* out);
/* rows: count x dim row-major. */
VP_API vp_status vp_renorm_mean(const float* rows, size_t count, size_t dim, float* out);

/* Embedding stores. */
typedef struct vp_store vp_store;
VP_API vp_status vp_store_write(const char* dir, const char* const* ids, const float* rows,
                                size_t count, size_t dim);
VP_API vp_status vp_store_open(const char* dir, vp_store** out);
VP_API void vp_store_close(vp_store* store);
VP_API size_t vp_store_count(const vp_store* store);
VP_API size_t vp_store_dim(const vp_store* store);
VP_API const char* vp_store_id(const vp_store* store, size_t index);
/* Returns VP_UNKNOWN_ID when absent. */
VP_API vp_status vp_store_find(const vp_store* store, const char* id, size_t* index);
VP_API const float* vp_store_row(const vp_store* store, size_t index);

/* Fusion and evaluation. desc_rows: n_desc x dim. */
VP_API vp_status vp_filter_descriptions(const float* video, const float* desc_rows, size_t n_desc,
                                        size_t dim, size_t k, size_t* out_indices, size_t* out_count);
/* config_json: fusion settings ({"beta1", "beta2_mode", ...}); NULL for defaults. */
VP_API vp_status vp_enhance_visual(const float* video, const float* desc_rows, size_t n_desc, size_t dim,
                                   const char* config_json, float* out, double* beta2_used);
/* Index of the most cosine-similar class row; ties go to the lowest index. */
VP_API vp_status vp_classify(const float* video, const float* class_rows, size_t n_classes, size_t dim,
                             size_t* out_index, double* out_score);
/* truth[i]: gallery row of query i. out[j] receives R@ks[j]. */
VP_API vp_status vp_recall_at_k(const float* queries, size_t n_queries, const float* gallery,
                                size_t n_gallery, size_t dim, const size_t* truth, const size_t* ks,
                                size_t n_ks, double* out);
VP_API vp_status vp_time_consistency(const float* videos, const float* attractors,
                                     const float* distractors, size_t count, size_t dim, double* out);

/* Pipeline commands ("classify", "descriptors gen", ...). options_json holds
 * flag values; see the CLI for keys. */
typedef struct vp_context vp_context;
VP_API vp_context* vp_context_create(void);
VP_API void vp_context_destroy(vp_context* ctx);
VP_API vp_status vp_run(vp_context* ctx, const char* command, const char* options_json);
/* Summary JSON of the last successful vp_run on ctx. */
VP_API const char* vp_last_result_json(const vp_context* ctx);

#ifdef __cplusplus
}
#endif

#endif /* VIDEOPROMPTER_H */
