#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "core/types.hpp"
#include "genclient/client.hpp"

namespace vp {

// Splits a free-form attribute response on commas and newlines, drops list
// markers, header lines ending in ':' and trailing periods. Order is kept,
// exact duplicates are dropped.
std::vector<std::string> parse_attributes(std::string_view response);

// Queries the attribute and description prompts once each. A descriptor whose
// completion stays empty after all retries is left absent rather than failing
// the class; any other backend failure propagates.
DescriptorSet generate_descriptor_set(const std::string& class_name, GenClient& client,
                                      const HierarchyMap* hierarchy = nullptr);

// One completion of the hierarchy prompt over the comma-joined class list.
std::string generate_hierarchy(const std::vector<std::string>& classes, GenClient& client);

struct HierarchyDiagnostics {
  // Children in the response that match no dataset class.
  std::vector<std::string> unmatched;
  // Dataset classes the response never mentioned (placed under "other").
  std::vector<std::string> defaulted;
};

// Parses "parent: child, child, ..." lines. Class matching ignores case,
// whitespace and underscores; parents named "other"/"others" map to "other".
// Throws kDuplicateAssignment when a class appears twice.
HierarchyMap parse_hierarchy(std::string_view response, const std::vector<std::string>& classes,
                             HierarchyDiagnostics* diagnostics = nullptr);

// Re-validates a hand-curated hierarchy against the dataset classes with the
// same matching and fallback rules as parse_hierarchy.
HierarchyMap normalize_hierarchy(const HierarchyMap& raw, const std::vector<std::string>& classes,
                                 HierarchyDiagnostics* diagnostics = nullptr);

// Throws kSchema unless every class appears exactly once and "other" exists.
void check_hierarchy(const HierarchyMap& h, const std::vector<std::string>& classes);

struct AugmentedCaption {
  std::vector<std::string> captions;
  bool padded = false;  // fewer distinct outputs than requested
};

// n distinct paraphrases, one completion per sample index. Extra draws (up to
// max_retries) are made when samples repeat; if still short, the last caption
// is duplicated and `padded` is set.
AugmentedCaption augment_caption(const std::string& caption, GenClient& client, int n = 2);

// Exactly n descriptions of the video at the given temperature.
std::vector<std::string> generate_video_descriptions(const std::string& video_id,
                                                     GenClient& client, int n,
                                                     double temperature);

}  // namespace vp
