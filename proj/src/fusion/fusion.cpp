#include "fusion/fusion.hpp"

#include <algorithm>
#include <numeric>

#include "core/errors.hpp"

namespace vp {

namespace {

void check_dims(const Embedding& video, std::span<const Embedding> descriptions) {
  for (const auto& d : descriptions) {
    if (d.dim() != video.dim()) {
      throw Error(ErrorCode::kDimMismatch, "description dim " + std::to_string(d.dim()) +
                                               " differs from video dim " + std::to_string(video.dim()));
    }
  }
}

// Unit inputs pass through unchanged, so fusion only ever sees directions.
Embedding direction(const Embedding& e) { return e.is_unit() ? e : normalize(e); }

}  // namespace

std::vector<std::size_t> filter_descriptions(const Embedding& video,
                                             std::span<const Embedding> descriptions,
                                             std::size_t k) {
  if (descriptions.empty()) throw Error(ErrorCode::kEmptyList, "no descriptions to filter");
  check_dims(video, descriptions);
  std::vector<std::size_t> order(descriptions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (k >= descriptions.size()) return order;

  std::vector<double> sims(descriptions.size());
  for (std::size_t i = 0; i < descriptions.size(); ++i) sims[i] = cosine(video, descriptions[i]);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&sims](std::size_t a, std::size_t b) {
                      return sims[a] > sims[b] || (sims[a] == sims[b] && a < b);
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

double beta2(const Embedding& video, const Embedding& description, const FusionConfig& config) {
  if (video.dim() != description.dim()) {
    throw Error(ErrorCode::kDimMismatch, "description dim differs from video dim");
  }
  if (config.beta2_mode == Beta2Mode::kFixed) return config.fixed_beta2;
  const double c = cosine(video, description);
  return config.clamp_negative ? std::max(0.0, c) : c;
}

EnhancedVisual enhance_visual(const Embedding& video, std::span<const Embedding> descriptions,
                              const FusionConfig& config) {
  EnhancedVisual out;
  if (descriptions.empty()) {
    out.vector = direction(video);
    return out;
  }
  check_dims(video, descriptions);
  const Embedding vdir = direction(video);
  std::vector<Embedding> dirs;
  dirs.reserve(descriptions.size());
  for (const auto& d : descriptions) dirs.push_back(direction(d));
  const auto v = vdir.values();
  std::vector<double> acc(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] = config.beta1 * v[i];

  if (config.aggregate == DescriptionAggregate::kMean) {
    const Embedding mean = renorm_mean(dirs);
    out.beta2_used = beta2(vdir, mean, config);
    if (out.beta2_used == 0.0 && config.beta1 > 0.0) {
      out.vector = vdir;
      return out;
    }
    const auto d = mean.values();
    for (std::size_t i = 0; i < d.size(); ++i) acc[i] += out.beta2_used * d[i];
  } else {
    double sum_beta = 0.0;
    for (const auto& d : dirs) {
      const double b = beta2(vdir, d, config);
      sum_beta += b;
      const auto dv = d.values();
      for (std::size_t i = 0; i < dv.size(); ++i) acc[i] += b * dv[i];
    }
    out.beta2_used = sum_beta / static_cast<double>(descriptions.size());
    if (sum_beta == 0.0 && config.beta1 > 0.0) {
      out.vector = vdir;
      return out;
    }
  }
  out.vector = normalize_accumulator(acc);
  return out;
}

EnhancedVisual fuse_video(const std::string& video_id, const Embedding& video,
                          std::span<const Embedding> descriptions, const FusionConfig& config) {
  std::vector<std::size_t> kept;
  std::vector<Embedding> selected;
  if (!descriptions.empty()) {
    kept = config.filtering_enabled ? filter_descriptions(video, descriptions, config.filter_k)
                                    : filter_descriptions(video, descriptions, descriptions.size());
    for (auto i : kept) selected.push_back(descriptions[i]);
  }
  EnhancedVisual out = enhance_visual(video, selected, config);
  out.video_id = video_id;
  out.descriptions_kept = std::move(kept);
  return out;
}

}  // namespace vp
