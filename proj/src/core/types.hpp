#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/embedding.hpp"

namespace vp {

struct VideoRecord {
  std::string id;
  Embedding embedding;
  std::vector<std::string> descriptions;
  std::optional<std::string> label;
};

struct ClassEntry {
  std::string name;
  std::size_t index = 0;

  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

// Names must be unique; indices follow list order. Throws kDuplicateId or
// kInvalidInput on an empty name.
std::vector<ClassEntry> make_class_list(const std::vector<std::string>& names);

struct DescriptorProvenance {
  std::string backend;
  std::string model;
  double temperature = 0.0;
  int template_version = 0;

  friend bool operator==(const DescriptorProvenance&, const DescriptorProvenance&) = default;
};

// Per-class LLM output. An absent descriptor (generation failed or returned
// nothing) is an empty optional, never an empty string.
struct DescriptorSet {
  std::string class_name;
  std::optional<std::vector<std::string>> attributes;
  std::optional<std::string> description;
  std::optional<std::string> parent_context;
  DescriptorProvenance provenance;

  friend bool operator==(const DescriptorSet&, const DescriptorSet&) = default;
};

inline constexpr const char* kOtherParent = "other";

// Parent context -> member classes. Every class of the dataset appears in
// exactly one list; the "other" parent always exists.
struct HierarchyMap {
  std::map<std::string, std::vector<std::string>> parents;

  // Parent of a class, if assigned anywhere.
  std::optional<std::string> parent_of(const std::string& class_name) const;

  friend bool operator==(const HierarchyMap&, const HierarchyMap&) = default;
};

enum class Beta2Mode { kCosine, kFixed };

// How several kept descriptions enter the fusion sum.
enum class DescriptionAggregate {
  kMean,            // average the descriptions, one beta2 for the mean
  kPerDescription,  // one beta2 per description, weighted sum
};

struct FusionConfig {
  double beta1 = 1.0;
  Beta2Mode beta2_mode = Beta2Mode::kCosine;
  double fixed_beta2 = 0.0;
  bool clamp_negative = true;
  std::size_t filter_k = 3;
  bool filtering_enabled = true;
  DescriptionAggregate aggregate = DescriptionAggregate::kMean;

  // Throws kConfig when beta1 < 0, fixed beta2 is outside [0, 1] or
  // filter_k == 0.
  void validate() const;
};

}  // namespace vp
