#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"

namespace vp {

// Descriptor document:
//   {"model": ..., "temperature": ..., "backend": ..., "template_version": ...,
//    "classes": {name: {"attributes": [...], "description": "...", "parent": ...|null}}}
// Absent descriptors serialize as null.
struct DescriptorDocument {
  std::string model;
  double temperature = 0.0;
  std::string backend;
  int template_version = 0;
  std::map<std::string, DescriptorSet> classes;

  friend bool operator==(const DescriptorDocument&, const DescriptorDocument&) = default;
};

nlohmann::json descriptors_to_json(const DescriptorDocument& doc);
// Throws kSchema with the JSON path of the offending field.
DescriptorDocument descriptors_from_json(const nlohmann::json& j);
DescriptorDocument read_descriptors(const std::filesystem::path& path);
void write_descriptors(const DescriptorDocument& doc, const std::filesystem::path& path);

// {"parents": {context: [classes]}}
nlohmann::json hierarchy_to_json(const HierarchyMap& h);
HierarchyMap hierarchy_from_json(const nlohmann::json& j);
HierarchyMap read_hierarchy_json(const std::filesystem::path& path);
void write_hierarchy_json(const HierarchyMap& h, const std::filesystem::path& path);

// {"video_id": ..., "descriptions": [...]}
struct VideoDescriptions {
  std::string video_id;
  std::vector<std::string> descriptions;
};

// {"id": ..., "caption": ..., "generated": [...], "padded": bool}
struct CaptionRecord {
  std::string id;
  std::string caption;
  std::vector<std::string> generated;
  bool padded = false;  // generated was filled up with repeats
};

// {"video_id": ..., "label": ...}
struct LabelRecord {
  std::string video_id;
  std::string label;
};

// {"video_id": ..., "predicted": ..., "score": ..., "label"?: ..., "ranked"?: [[class, score], ...]}
struct PredictionRecord {
  std::string video_id;
  std::string predicted;
  double score = 0.0;
  std::optional<std::string> label;
  std::vector<std::pair<std::string, double>> ranked;
};

// {"video_id": ..., "beta2_used": ..., "descriptions_kept": [...]}
struct FusionRecord {
  std::string video_id;
  double beta2_used = 0.0;
  std::vector<std::size_t> descriptions_kept;
};

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::vector<nlohmann::json>& rows, const std::filesystem::path& path);

std::vector<VideoDescriptions> read_video_descriptions(const std::filesystem::path& path);
void write_video_descriptions(const std::vector<VideoDescriptions>& rows,
                              const std::filesystem::path& path);
std::vector<CaptionRecord> read_captions(const std::filesystem::path& path);
void write_captions(const std::vector<CaptionRecord>& rows, const std::filesystem::path& path);
std::vector<LabelRecord> read_labels(const std::filesystem::path& path);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::vector<PredictionRecord>& rows,
                       const std::filesystem::path& path);
std::vector<FusionRecord> read_fusion_records(const std::filesystem::path& path);
void write_fusion_records(const std::vector<FusionRecord>& rows,
                          const std::filesystem::path& path);

// One entry per nonblank line, trimmed; '#' starts a comment line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace vp
