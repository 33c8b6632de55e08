#include "explain/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "core/errors.hpp"
#include "core/text.hpp"
#include "store/fs.hpp"

namespace vp {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string md_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

std::string markdown(const AttributionReport& r) {
  std::ostringstream os;
  os << "# " << md_escape(r.class_name) << " / " << md_escape(r.video_id) << "\n\n";
  if (r.predicted_class) {
    os << "Predicted: " << md_escape(*r.predicted_class);
    if (r.predicted_score) os << " (" << fixed(*r.predicted_score, 4) << ")";
    os << "\n\n";
  }
  os << "| rank | attribute | cosine |\n|---:|---|---:|\n";
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    os << "| " << i + 1 << " | " << md_escape(r.entries[i].attribute) << " | "
       << fixed(r.entries[i].score, 6) << " |\n";
  }
  return os.str();
}

std::string csv(const AttributionReport& r) {
  std::ostringstream os;
  os << "rank,attribute,cosine\r\n";
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    os << i + 1 << ',' << csv_field(r.entries[i].attribute) << ',' << fixed(r.entries[i].score, 9) << "\r\n";
  }
  return os.str();
}

// Horizontal bars from a zero axis; negative scores extend left.
std::string svg(const AttributionReport& r) {
  constexpr int kLabelWidth = 220, kBarSpan = 300, kRow = 22, kTop = 30;
  const int height = kTop + static_cast<int>(r.entries.size()) * kRow + 10;
  const int width = kLabelWidth + 2 * kBarSpan + 80;
  const int axis = kLabelWidth + kBarSpan;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"10\" y=\"18\">" << xml_escape(r.class_name) << " / " << xml_escape(r.video_id) << "</text>\n";
  os << "<line x1=\"" << axis << "\" y1=\"" << kTop - 4 << "\" x2=\"" << axis << "\" y2=\"" << height - 6
     << "\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const auto& e = r.entries[i];
    const int y = kTop + static_cast<int>(i) * kRow;
    const int len = static_cast<int>(std::lround(std::abs(e.score) * kBarSpan));
    const int x = e.score >= 0 ? axis : axis - len;
    os << "<text x=\"" << kLabelWidth - 6 << "\" y=\"" << y + 13 << "\" text-anchor=\"end\">"
       << xml_escape(e.attribute) << "</text>\n";
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << len << "\" height=\"" << kRow - 6
       << "\" fill=\"" << (e.score >= 0 ? "#3b7dd8" : "#d8643b") << "\"/>\n";
    os << "<text x=\"" << (e.score >= 0 ? axis + len + 4 : axis + 4) << "\" y=\"" << y + 13 << "\">"
       << fixed(e.score, 3) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::vector<AttributionEntry> attribute_contributions(const Embedding& video,
                                                      const std::vector<std::string>& attributes,
                                                      TextEmbedder& embedder) {
  if (attributes.empty()) throw Error(ErrorCode::kEmptyList, "no attributes to explain");
  const Matrix m = embedder.embed(attributes);
  if (m.cols() != video.dim()) {
    throw Error(ErrorCode::kDimMismatch, "attribute embeddings do not match the video dimension");
  }
  std::vector<AttributionEntry> out;
  out.reserve(attributes.size());
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    out.push_back({attributes[i], cosine(video.values(), m.row(i))});
  }
  std::ranges::stable_sort(out, [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;
}

std::string render_report(const AttributionReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kMarkdown: return markdown(report);
    case ReportFormat::kCsv: return csv(report);
    case ReportFormat::kSvgBar: return svg(report);
  }
  return markdown(report);
}

void emit_report(const AttributionReport& report, ReportFormat format, const std::filesystem::path& path) {
  write_file_atomic(path, render_report(report, format));
}

std::string report_file_name(const AttributionReport& report, ReportFormat format) {
  const char* ext = format == ReportFormat::kMarkdown ? "md" : format == ReportFormat::kCsv ? "csv" : "svg";
  return "explain_" + file_safe(report.video_id) + "_" + file_safe(report.class_name) + "." + ext;
}

}  // namespace vp
