#include <doctest.h>

#include <random>
#include <set>

#include "core/errors.hpp"
#include "explain/explain.hpp"
#include "store/fs.hpp"
#include "support.hpp"

using namespace vp;
using vp::test::parse_csv;
using vp::test::scaled;
using vp::test::TempDir;
using vp::test::vec;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidInput;
}

// cos_target * v + sqrt(1 - cos_target^2) * u with u a unit vector orthogonal to v.
Embedding at_cosine(const Embedding& v, double cos_target, std::mt19937_64& rng) {
  const Embedding r = random_unit(rng, v.dim());
  const double proj = dot(r.values(), v.values());
  std::vector<double> u(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) u[i] = r[i] - proj * v[i];
  const Embedding un = normalize_accumulator(u);
  std::vector<double> out(v.dim());
  const double s = std::sqrt(1.0 - cos_target * cos_target);
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = cos_target * v[i] + s * un[i];
  return normalize_accumulator(out);
}

AttributionReport report_of(std::vector<AttributionEntry> entries) {
  AttributionReport r;
  r.video_id = "vid_1";
  r.class_name = "golf swing";
  r.entries = std::move(entries);
  return r;
}

}  // namespace

TEST_CASE("identity and orthogonal attributes") {
  MockTextEmbedder e(3, 0);
  e.set_override("same", vec({1, 0, 0}));
  e.set_override("orth", vec({0, 1, 0}));
  const auto v = vec({1, 0, 0});
  const auto one = attribute_contributions(v, {"same"}, e);
  REQUIRE(one.size() == 1);
  CHECK(one[0].attribute == "same");
  CHECK(one[0].score == doctest::Approx(1.0));
  CHECK(attribute_contributions(v, {"orth"}, e)[0].score == 0.0);
  CHECK(code_of([&] { attribute_contributions(v, {}, e); }) == ErrorCode::kEmptyList);
  CHECK(code_of([&] { attribute_contributions(vec({1, 0}), {"same"}, e); }) == ErrorCode::kDimMismatch);
}

TEST_CASE("attributes are embedded raw and ordered by score, ties in list order") {
  MockTextEmbedder e(2, 0);
  e.set_override("a", vec({0.6f, 0.8f}));
  e.set_override("b", vec({1, 0}));
  e.set_override("c", vec({0.6f, 0.8f}));
  const auto entries = attribute_contributions(vec({1, 0}), {"a", "b", "c"}, e);
  CHECK(entries[0].attribute == "b");
  CHECK(entries[1].attribute == "a");
  CHECK(entries[2].attribute == "c");
}

TEST_CASE("golf video: scene and motion attributes lead the ranking") {
  std::mt19937_64 rng(41);
  MockTextEmbedder e(64, 0);
  const Embedding video = random_unit(rng, 64);
  e.set_override("golf-course", at_cosine(video, 0.62, rng));
  e.set_override("golf-ball", at_cosine(video, 0.55, rng));
  e.set_override("swing", at_cosine(video, 0.48, rng));
  const std::vector<std::string> attrs{"spectators", "swing", "umbrella", "golf-ball", "cap", "golf-course"};
  const auto entries = attribute_contributions(video, attrs, e);
  REQUIRE(entries.size() == attrs.size());
  const std::set<std::string> top{entries[0].attribute, entries[1].attribute, entries[2].attribute};
  CHECK(top == std::set<std::string>{"golf-course", "golf-ball", "swing"});
  CHECK(entries[0].attribute == "golf-course");
  for (const auto& entry : entries) {
    CHECK(entry.score >= -1.0);
    CHECK(entry.score <= 1.0);
  }

  // Ordering is unchanged by rescaling the video.
  const auto rescaled = attribute_contributions(scaled(video, 7.0f), attrs, e);
  for (std::size_t i = 0; i < entries.size(); ++i) CHECK(rescaled[i].attribute == entries[i].attribute);
}

TEST_CASE("markdown report lists entries in score order") {
  const auto r = report_of({{"golf-course", 0.5}, {"golf-ball", 0.25}, {"cap", -0.125}});
  const std::string md = render_report(r, ReportFormat::kMarkdown);
  const auto course = md.find("| 1 | golf-course | 0.500000 |");
  const auto ball = md.find("| 2 | golf-ball | 0.250000 |");
  const auto cap = md.find("| 3 | cap | -0.125000 |");
  CHECK(course != std::string::npos);
  CHECK(ball > course);
  CHECK(cap > ball);
  CHECK(render_report(r, ReportFormat::kMarkdown) == md);
}

TEST_CASE("csv report round-trips through a CSV reader") {
  const auto r = report_of({{"ball, white", 0.5}, {"say \"fore\"", 0.25}, {"plain", 0.0}});
  const auto rows = parse_csv(render_report(r, ReportFormat::kCsv));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"rank", "attribute", "cosine"});
  CHECK(rows[1][1] == "ball, white");
  CHECK(rows[2][1] == "say \"fore\"");
  CHECK(std::stod(rows[1][2]) == 0.5);
  CHECK(rows[3][0] == "3");
}

TEST_CASE("svg report has one bar per attribute") {
  const auto r = report_of({{"a", 0.9}, {"b<c", -0.3}, {"d", 0.1}, {"e", 0.0}});
  const std::string svg = render_report(r, ReportFormat::kSvgBar);
  std::size_t rects = 0;
  for (auto pos = svg.find("<rect"); pos != std::string::npos; pos = svg.find("<rect", pos + 1)) ++rects;
  CHECK(rects == 4);
  CHECK(svg.find("b&lt;c") != std::string::npos);
  CHECK(svg.starts_with("<svg"));
}

TEST_CASE("emit_report writes the named file") {
  TempDir tmp;
  auto r = report_of({{"a", 0.9}});
  r.class_name = "golf/swing";
  CHECK(report_file_name(r, ReportFormat::kMarkdown) == "explain_vid_1_golf_swing.md");
  CHECK(report_file_name(r, ReportFormat::kCsv).ends_with(".csv"));
  CHECK(report_file_name(r, ReportFormat::kSvgBar).ends_with(".svg"));
  const auto path = tmp / report_file_name(r, ReportFormat::kCsv);
  emit_report(r, ReportFormat::kCsv, path);
  CHECK(read_file(path) == render_report(r, ReportFormat::kCsv));
  write_file_atomic(tmp / "blocker", "a file, not a directory");
  CHECK(code_of([&] { emit_report(r, ReportFormat::kCsv, tmp / "blocker" / "x.csv"); }) == ErrorCode::kIo);
}
