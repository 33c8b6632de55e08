#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "classifier/embedder.hpp"

namespace vp {

struct AttributionEntry {
  std::string attribute;
  double score = 0.0;  // cosine with the video, in [-1, 1]
};

struct AttributionReport {
  std::string video_id;
  std::string class_name;
  std::vector<AttributionEntry> entries;  // descending score, ties in attribute order
  std::optional<std::string> predicted_class;
  std::optional<double> predicted_score;
};

// Embeds each attribute as a raw string and scores it against the video.
// Throws kEmptyList, kDimMismatch, kEmbedder.
std::vector<AttributionEntry> attribute_contributions(const Embedding& video,
                                                      const std::vector<std::string>& attributes,
                                                      TextEmbedder& embedder);

enum class ReportFormat { kMarkdown, kCsv, kSvgBar };

std::string render_report(const AttributionReport& report, ReportFormat format);
// Writes the rendered report atomically. Throws kIo.
void emit_report(const AttributionReport& report, ReportFormat format, const std::filesystem::path& path);

// explain_<video>_<class>.<ext> with unsafe characters replaced.
std::string report_file_name(const AttributionReport& report, ReportFormat format);

}  // namespace vp
