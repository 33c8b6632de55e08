#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "core/errors.hpp"
#include "eval/ablation.hpp"
#include "eval/eval.hpp"
#include "support.hpp"

using namespace vp;
using vp::test::random_units;
using vp::test::ref_cosine;
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

ClassifierMatrix classifier_of(const std::vector<Embedding>& rows) {
  ClassifierMatrix m;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < rows.size(); ++i) names.push_back("c" + std::to_string(i));
  m.classes = make_class_list(names);
  m.rows = Matrix::from_rows(rows);
  return m;
}

// Exhaustive argmax in long double; first maximum wins.
std::size_t argmax_oracle(const Embedding& v, const std::vector<Embedding>& rows) {
  std::size_t best = 0;
  long double best_score = ref_cosine(v, rows[0]);
  for (std::size_t c = 1; c < rows.size(); ++c) {
    const long double s = ref_cosine(v, rows[c]);
    if (s > best_score) {
      best = c;
      best_score = s;
    }
  }
  return best;
}

// 1-based position of `truth` after a full stable sort by descending cosine.
std::size_t rank_oracle(const Embedding& q, const std::vector<Embedding>& gallery, std::size_t truth) {
  std::vector<std::size_t> order(gallery.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<long double> sims;
  for (const auto& g : gallery) sims.push_back(ref_cosine(q, g));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), truth) - order.begin()) + 1;
}

Prediction pred(const std::string& video, const std::string& cls) {
  Prediction p;
  p.video_id = video;
  p.predicted_class = cls;
  return p;
}

}  // namespace

TEST_CASE("classify examples") {
  const auto one = classifier_of({vec({0.6f, 0.8f})});
  const auto p = classify("v", vec({1, 0}).values(), one);
  CHECK(p.predicted_class == "c0");
  CHECK(p.score == doctest::Approx(0.6));

  const auto tied = classifier_of({vec({0, 1}), vec({1, 0}), vec({1, 0})});
  CHECK(classify("v", vec({1, 0}).values(), tied).class_index == 1);

  const auto ranked = classify("v", vec({1, 0}).values(), tied, 5).ranked;
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].first == "c1");
  CHECK(ranked[1].first == "c2");
  CHECK(ranked[2].first == "c0");

  CHECK(code_of([] { classify("v", vec({1, 0}).values(), ClassifierMatrix{}); }) == ErrorCode::kEmptyClassifier);
  CHECK(code_of([&] { classify("v", vec({1, 0, 0}).values(), one); }) == ErrorCode::kDimMismatch);
}

TEST_CASE("classify matches an exhaustive oracle and ignores positive scale") {
  std::mt19937_64 rng(31);
  const auto rows = random_units(rng, 20, 64);
  const auto m = classifier_of(rows);
  std::vector<Embedding> scaled_rows;
  for (const auto& r : rows) scaled_rows.push_back(scaled(r, 3.5f));
  const auto m_scaled = classifier_of(scaled_rows);
  for (int i = 0; i < 100; ++i) {
    const auto v = random_unit(rng, 64);
    const auto p = classify("v", v.values(), m);
    CHECK(p.class_index == argmax_oracle(v, rows));
    CHECK(p.score == cosine(v, rows[p.class_index]));
    CHECK(classify("v", scaled(v, 0.25f).values(), m_scaled).class_index == p.class_index);
  }
}

TEST_CASE("classify_all is independent of worker count") {
  std::mt19937_64 rng(32);
  const auto m = classifier_of(random_units(rng, 12, 16));
  std::vector<EnhancedVisual> fused;
  for (int i = 0; i < 50; ++i) fused.push_back({"v" + std::to_string(i), random_unit(rng, 16), 0.0, {}});
  const auto a = classify_all(fused, m, 3, 1);
  const auto b = classify_all(fused, m, 3, 8);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].video_id == fused[i].video_id);
    CHECK(a[i].class_index == b[i].class_index);
    CHECK(a[i].score == b[i].score);
    CHECK(a[i].ranked == b[i].ranked);
  }
}

TEST_CASE("top-1 accuracy counting") {
  const std::map<std::string, std::string> labels{{"a", "x"}, {"b", "y"}, {"c", "x"}, {"d", "y"}};
  const std::vector<Prediction> three{pred("a", "x"), pred("b", "y"), pred("c", "x"), pred("d", "x")};
  CHECK(top1_accuracy(three, labels) == 0.75);
  const std::vector<Prediction> all{pred("a", "x"), pred("b", "y")};
  CHECK(top1_accuracy(all, labels) == 1.0);
  const std::vector<Prediction> none{pred("a", "y"), pred("b", "x")};
  CHECK(top1_accuracy(none, labels) == 0.0);
  const std::vector<Prediction> unlabeled{pred("z", "x")};
  CHECK(code_of([&] { top1_accuracy(unlabeled, labels); }) == ErrorCode::kMissingLabel);
  CHECK(code_of([&] { top1_accuracy(std::vector<Prediction>{}, labels); }) == ErrorCode::kEmptyList);
}

TEST_CASE("recall@K matches a sort oracle in both directions") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto videos = random_units(rng, 20, 32);
    const auto texts = random_units(rng, 20, 32);
    std::vector<std::size_t> truth(20);
    std::iota(truth.begin(), truth.end(), std::size_t{0});
    std::shuffle(truth.begin(), truth.end(), rng);
    std::vector<std::size_t> inverse(20);
    for (std::size_t i = 0; i < 20; ++i) inverse[truth[i]] = i;
    const std::vector<std::size_t> ks{1, 5};

    const auto v2t = recall_at_k(Matrix::from_rows(videos), Matrix::from_rows(texts), truth, ks);
    const auto t2v = recall_at_k(Matrix::from_rows(texts), Matrix::from_rows(videos), inverse, ks);
    for (std::size_t k : ks) {
      std::size_t hits_v = 0, hits_t = 0;
      for (std::size_t i = 0; i < 20; ++i) {
        hits_v += rank_oracle(videos[i], texts, truth[i]) <= k;
        hits_t += rank_oracle(texts[i], videos, inverse[i]) <= k;
      }
      CHECK(v2t.at(k) == static_cast<double>(hits_v) / 20.0);
      CHECK(t2v.at(k) == static_cast<double>(hits_t) / 20.0);
    }
  }
}

TEST_CASE("recall@K properties") {
  std::mt19937_64 rng(34);
  const auto g = random_units(rng, 15, 16);
  const Matrix gm = Matrix::from_rows(g);
  std::vector<std::size_t> identity(15);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  const std::vector<std::size_t> k1{1};
  CHECK(recall_at_k(gm, gm, identity, k1).at(1) == 1.0);

  const auto q = random_units(rng, 15, 16);
  std::vector<std::size_t> ks(15);
  std::iota(ks.begin(), ks.end(), std::size_t{1});
  const auto r = recall_at_k(Matrix::from_rows(q), gm, identity, ks, 4);
  for (std::size_t k = 2; k <= 15; ++k) CHECK(r.at(k) >= r.at(k - 1));
  CHECK(r.at(15) == 1.0);

  const std::vector<std::size_t> bad{0, 99};
  CHECK(code_of([&] { recall_at_k(Matrix::from_rows(std::vector{g[0], g[1]}), gm, bad, k1); }) ==
        ErrorCode::kInvalidInput);
  CHECK(ground_truth_rank(vec({1, 0}).values(), Matrix::from_rows(std::vector{vec({1, 0}), vec({1, 0})}), 1) == 2);
}

TEST_CASE("recall@K over stores resolves ids") {
  TempDir tmp;
  write_store(tmp / "q", {"v1", "v2"}, std::vector{vec({1, 0}), vec({0, 1})});
  write_store(tmp / "g", {"t2", "t1"}, std::vector{vec({0, 1}), vec({1, 0})});
  const auto q = read_store(tmp / "q");
  const auto g = read_store(tmp / "g");
  const std::vector<std::size_t> ks{1};
  CHECK(recall_at_k(q, g, {{"v1", "t1"}, {"v2", "t2"}}, ks).at(1) == 1.0);
  CHECK(recall_at_k(q, g, {{"v1", "t2"}, {"v2", "t1"}}, ks).at(1) == 0.0);
  CHECK(code_of([&] { recall_at_k(q, g, {{"v1", "nope"}, {"v2", "t2"}}, ks); }) == ErrorCode::kUnknownId);
}

TEST_CASE("time consistency") {
  std::mt19937_64 rng(35);
  const auto v = random_units(rng, 50, 8);
  std::vector<Embedding> orth;
  for (const auto& x : v) {
    // Any vector orthogonal to x: swap two coordinates with a sign flip.
    std::vector<float> o(x.values().begin(), x.values().end());
    std::fill(o.begin(), o.end(), 0.0f);
    o[0] = -x[1];
    o[1] = x[0];
    orth.push_back(Embedding(o));
  }
  const Matrix vm = Matrix::from_rows(v), om = Matrix::from_rows(orth);
  const auto dom = time_consistency(vm, vm, om);
  CHECK(dom.score() == 1.0);
  CHECK(dom.wins == 50);
  CHECK(time_consistency(vm, om, om).score() == 0.5);

  // Swapping roles exchanges wins and losses. With 32 triples every score is
  // a multiple of 1/64, so s and 1 - s are also exact in binary floating point.
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = Matrix::from_rows(random_units(rng, 32, 8));
    const Matrix d = Matrix::from_rows(random_units(rng, 32, 8));
    const Matrix q = Matrix::from_rows(random_units(rng, 32, 8));
    const auto fwd = time_consistency(q, a, d), back = time_consistency(q, d, a);
    CHECK(fwd.wins == back.losses);
    CHECK(fwd.losses == back.wins);
    CHECK(fwd.ties == back.ties);
    CHECK(fwd.score() == 1.0 - back.score());
  }

  const Matrix big_v = Matrix::from_rows(random_units(rng, 1000, 64));
  const Matrix big_a = Matrix::from_rows(random_units(rng, 1000, 64));
  const Matrix big_d = Matrix::from_rows(random_units(rng, 1000, 64));
  CHECK(std::abs(time_consistency(big_v, big_a, big_d).score() - 0.5) <= 0.05);

  CHECK(code_of([] { TimeConsistency{}.score(); }) == ErrorCode::kEmptyList);
}

TEST_CASE("time consistency over stores") {
  TempDir tmp;
  write_store(tmp / "v", {"a", "b"}, std::vector{vec({1, 0}), vec({0, 1})});
  write_store(tmp / "att", {"b", "a"}, std::vector{vec({0, 1}), vec({1, 0})});
  write_store(tmp / "dis", {"a", "b"}, std::vector{vec({0, 1}), vec({0, 1})});
  const auto v = read_store(tmp / "v"), a = read_store(tmp / "att"), d = read_store(tmp / "dis");
  const auto tc = time_consistency(v, a, d, {"a", "b"});
  CHECK(tc.wins == 1);
  CHECK(tc.ties == 1);
  CHECK(tc.score() == 0.75);
  CHECK(code_of([&] { time_consistency(v, a, d, {"zz"}); }) == ErrorCode::kUnknownId);
}

TEST_CASE("eval report shape") {
  EvalReport r;
  r.metrics["top1_accuracy"] = 0.5;
  const auto j = r.to_json();
  CHECK(j["metrics"]["top1_accuracy"] == 0.5);
  CHECK(j["records"].is_array());
  CHECK(j["config"].is_object());
}

namespace {

// Two classes whose base prompts embed identically; descriptors separate them.
struct AblationFixture {
  TempDir tmp;
  MockTextEmbedder embedder{4, 0};
  AblationDataset data;

  AblationFixture() {
    embedder.set_override("a photo of a left", vec({0, 0, 1, 0}));
    embedder.set_override("a photo of a right", vec({0, 0, 1, 0}));
    embedder.set_override("l-attr", vec({1, 0, 0, 0}));
    embedder.set_override("r-attr", vec({0, 1, 0, 0}));
    data.classes = {"left", "right"};
    for (const char* c : {"left", "right"}) {
      DescriptorSet d;
      d.class_name = c;
      d.attributes = std::vector<std::string>{std::string(c) == "left" ? "l-attr" : "r-attr"};
      data.descriptors.emplace(c, d);
    }
    write_store(tmp / "videos", {"v0", "v1"}, std::vector{vec({1, 0, 0.1f, 0}), vec({0, 1, 0.1f, 0})});
    data.videos = read_store(tmp / "videos");
    data.labels = {{"v0", "left"}, {"v1", "right"}};
    data.description_sources["vgpt"] = {{"v0", {vec({1, 0, 0, 0})}}, {"v1", {vec({0, 1, 0, 0})}}};
  }

  std::vector<AblationCell> run(const AblationAxes& axes) {
    return run_ablation(axes, data, embedder, FusionConfig{}, {Component::kBase}, "none", 2);
  }
};

}  // namespace

TEST_CASE("ablation grid is the product of its axes") {
  AblationFixture f;
  AblationAxes axes;
  axes.filtering = std::vector{true, false};
  axes.components = std::vector{ComponentSet{Component::kBase},
                                ComponentSet{Component::kBase, Component::kAttributes, Component::kDescription}};
  const auto cells = f.run(axes);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].point.at("components") == "base");
  CHECK(cells[0].point.at("filtering") == "on");
  CHECK(cells[1].point.at("filtering") == "off");
  CHECK(cells[2].point.at("components") == "base+attributes+description");
  CHECK(*cells[0].top1_accuracy == 0.5);
  CHECK(*cells[3].top1_accuracy == 1.0);

  const auto csv = vp::test::parse_csv(ablation_csv(cells));
  REQUIRE(csv.size() == 5);
  CHECK(csv[0] == std::vector<std::string>{"components", "filtering", "filter_k", "beta2", "descriptions",
                                           "aggregate", "top1_accuracy", "status", "error"});
  CHECK(csv[4][6] == "1");
  CHECK(ablation_json(cells)["cells"].size() == 4);
  CHECK(f.run(axes).size() == 4);
}

TEST_CASE("failed ablation cells do not abort the grid") {
  AblationFixture f;
  AblationAxes axes;
  axes.descriptions = std::vector<std::string>{"none", "missing", "vgpt"};
  const auto cells = f.run(axes);
  REQUIRE(cells.size() == 3);
  CHECK_FALSE(cells[0].failed());
  CHECK(cells[1].failed());
  CHECK_FALSE(cells[1].top1_accuracy.has_value());
  // A base-only classifier has two identical rows; fusion cannot break the tie.
  CHECK(*cells[2].top1_accuracy == 0.5);
  const auto csv = vp::test::parse_csv(ablation_csv(cells));
  CHECK(csv[2][7] == "failed");
  CHECK_FALSE(csv[2][8].empty());
}

TEST_CASE("empty ablation grids") {
  AblationFixture f;
  CHECK(code_of([&] { f.run(AblationAxes{}); }) == ErrorCode::kEmptyGrid);
  AblationAxes empty_axis;
  empty_axis.filtering = std::vector<bool>{};
  CHECK(code_of([&] { f.run(empty_axis); }) == ErrorCode::kEmptyGrid);
  CHECK(code_of([] { ablation_axes_from_json(nlohmann::json{{"temperature", {0.2}}}); }) == ErrorCode::kConfig);
  const auto parsed = ablation_axes_from_json(
      nlohmann::json{{"components", {"base", {"base", "attributes"}}}, {"beta2", {"cosine", "fixed:0"}}});
  CHECK(parsed.components->size() == 2);
  CHECK(parsed.beta2->at(1) == "fixed:0");
}

TEST_CASE("beta2 settings") {
  FusionConfig c;
  apply_beta2_setting("fixed:0.25", c);
  CHECK(c.beta2_mode == Beta2Mode::kFixed);
  CHECK(c.fixed_beta2 == 0.25);
  apply_beta2_setting("cosine-raw", c);
  CHECK(c.beta2_mode == Beta2Mode::kCosine);
  CHECK_FALSE(c.clamp_negative);
  CHECK(code_of([&] { apply_beta2_setting("sometimes", c); }) == ErrorCode::kConfig);
}
