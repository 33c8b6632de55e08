#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "classifier/classifier.hpp"
#include "core/types.hpp"
#include "store/store.hpp"

namespace vp {

// Everything one ablation cell needs besides its configuration. Description
// sources map a name (for example "video_llm" or "none") to the embedded
// descriptions of each video; a video absent from a source has none.
struct AblationDataset {
  EmbeddingStore videos;
  std::map<std::string, std::string> labels;
  std::vector<std::string> classes;
  std::map<std::string, DescriptorSet> descriptors;
  std::optional<HierarchyMap> hierarchy;
  std::map<std::string, std::map<std::string, std::vector<Embedding>>> description_sources;
};

// A missing axis keeps the base configuration's value. Beta2 settings are
// "cosine", "cosine-raw" (no clamp) or "fixed:<value>".
struct AblationAxes {
  std::optional<std::vector<ComponentSet>> components;
  std::optional<std::vector<bool>> filtering;
  std::optional<std::vector<std::size_t>> filter_k;
  std::optional<std::vector<std::string>> beta2;
  std::optional<std::vector<std::string>> descriptions;
  std::optional<std::vector<DescriptionAggregate>> aggregate;
};

// Throws kConfig on malformed axes.
AblationAxes ablation_axes_from_json(const nlohmann::json& axes);

struct AblationCell {
  std::map<std::string, std::string> point;  // axis name -> value
  std::optional<double> top1_accuracy;
  std::string error;                          // nonempty when the cell failed

  bool failed() const noexcept { return !error.empty(); }
};

// Axis names in lattice order; the last axis varies fastest.
std::vector<std::string> ablation_axis_names();

// One cell per lattice point. A failing cell records its error and the grid
// continues. Throws kEmptyGrid when no axis is given or an axis is empty.
std::vector<AblationCell> run_ablation(const AblationAxes& axes, const AblationDataset& dataset,
                                       TextEmbedder& embedder, const FusionConfig& base,
                                       const ComponentSet& base_components,
                                       const std::string& base_descriptions, std::size_t workers);

// Header row plus one row per cell; RFC 4180 quoting.
std::string ablation_csv(const std::vector<AblationCell>& cells);
nlohmann::json ablation_json(const std::vector<AblationCell>& cells);

std::string_view aggregate_name(DescriptionAggregate a);
DescriptionAggregate aggregate_from_name(std::string_view name);
// Applies a beta2 setting string to `config`. Throws kConfig.
void apply_beta2_setting(const std::string& setting, FusionConfig& config);

}  // namespace vp
