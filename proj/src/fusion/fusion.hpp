#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "core/embedding.hpp"
#include "core/types.hpp"

namespace vp {

// A query video embedding after description fusion.
struct EnhancedVisual {
  std::string video_id;
  Embedding vector;                          // unit
  double beta2_used = 0.0;
  std::vector<std::size_t> descriptions_kept;
};

// Indices of the k descriptions most similar to the video, ties to the lower
// index, sorted ascending. All indices when k >= size. Throws kEmptyList,
// kDimMismatch.
std::vector<std::size_t> filter_descriptions(const Embedding& video,
                                             std::span<const Embedding> descriptions,
                                             std::size_t k);

// Cosine mode: cos(v, d), clamped at 0 when configured. Fixed mode: the
// configured value. Throws kDimMismatch.
double beta2(const Embedding& video, const Embedding& description, const FusionConfig& config);

// normalize(beta1 * v + beta2 * d) with d the renormalized mean of the
// descriptions; per-description aggregation sums beta2_i * d_i instead and
// reports the mean beta2_i. No descriptions, or a zero beta2 total, returns
// v. Inputs enter by direction only: non-unit vectors are normalized first.
// Throws kDimMismatch, kZeroVector.
EnhancedVisual enhance_visual(const Embedding& video, std::span<const Embedding> descriptions,
                              const FusionConfig& config);

// Filters (when enabled) then fuses. Kept indices refer to `descriptions`.
EnhancedVisual fuse_video(const std::string& video_id, const Embedding& video,
                          std::span<const Embedding> descriptions, const FusionConfig& config);

}  // namespace vp
