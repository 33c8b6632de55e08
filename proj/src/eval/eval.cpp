#include "eval/eval.hpp"

#include <algorithm>
#include <numeric>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace vp {

namespace {

void check_dim(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorCode::kDimMismatch, std::string(what) + " dim " + std::to_string(actual) +
                                             " differs from " + std::to_string(expected));
  }
}

}  // namespace

Prediction classify(const std::string& video_id, std::span<const float> vector,
                    const ClassifierMatrix& classifier, std::size_t top_m) {
  if (classifier.size() == 0) throw Error(ErrorCode::kEmptyClassifier, "classifier has no classes");
  check_dim(classifier.dim(), vector.size(), "video");
  std::vector<double> scores(classifier.size());
  std::size_t best = 0;
  for (std::size_t c = 0; c < classifier.size(); ++c) {
    scores[c] = cosine(vector, classifier.rows.row(c));
    if (scores[c] > scores[best]) best = c;
  }
  Prediction p{video_id, best, classifier.classes[best].name, scores[best], {}};
  if (top_m > 0) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t m = std::min(top_m, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                      [&scores](std::size_t a, std::size_t b) {
                        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                      });
    for (std::size_t i = 0; i < m; ++i) p.ranked.emplace_back(classifier.classes[order[i]].name, scores[order[i]]);
  }
  return p;
}

Prediction classify(const EnhancedVisual& fused, const ClassifierMatrix& classifier, std::size_t top_m) {
  return classify(fused.video_id, fused.vector.values(), classifier, top_m);
}

std::vector<Prediction> classify_all(std::span<const EnhancedVisual> fused,
                                     const ClassifierMatrix& classifier, std::size_t top_m,
                                     std::size_t workers) {
  std::vector<Prediction> out(fused.size());
  parallel_for(fused.size(), workers, [&](std::size_t i) { out[i] = classify(fused[i], classifier, top_m); });
  return out;
}

double top1_accuracy(std::span<const Prediction> predictions,
                     const std::map<std::string, std::string>& labels) {
  if (predictions.empty()) throw Error(ErrorCode::kEmptyList, "no predictions to score");
  std::size_t correct = 0;
  for (const auto& p : predictions) {
    auto it = labels.find(p.video_id);
    if (it == labels.end()) throw Error(ErrorCode::kMissingLabel, "no label for video " + p.video_id, p.video_id);
    if (it->second == p.predicted_class) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::size_t ground_truth_rank(std::span<const float> query, const Matrix& gallery, std::size_t truth) {
  const double target = cosine(query, gallery.row(truth));
  std::size_t rank = 1;
  for (std::size_t j = 0; j < gallery.rows(); ++j) {
    if (j == truth) continue;
    const double s = cosine(query, gallery.row(j));
    if (s > target || (s == target && j < truth)) ++rank;
  }
  return rank;
}

std::map<std::size_t, double> recall_at_k(const Matrix& queries, const Matrix& gallery,
                                          std::span<const std::size_t> truth,
                                          std::span<const std::size_t> ks, std::size_t workers) {
  if (queries.empty() || gallery.empty()) throw Error(ErrorCode::kEmptyList, "retrieval needs queries and gallery");
  check_dim(gallery.cols(), queries.cols(), "query");
  if (truth.size() != queries.rows()) {
    throw Error(ErrorCode::kInvalidInput, "one ground-truth index per query is required");
  }
  for (auto t : truth) {
    if (t >= gallery.rows()) throw Error(ErrorCode::kInvalidInput, "ground-truth index out of range");
  }
  std::vector<std::size_t> ranks(queries.rows());
  parallel_for(queries.rows(), workers,
               [&](std::size_t i) { ranks[i] = ground_truth_rank(queries.row(i), gallery, truth[i]); });
  std::map<std::size_t, double> out;
  for (auto k : ks) {
    const auto hits = static_cast<std::size_t>(std::ranges::count_if(ranks, [k](std::size_t r) { return r <= k; }));
    out[k] = static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return out;
}

std::map<std::size_t, double> recall_at_k(const EmbeddingStore& queries, const EmbeddingStore& gallery,
                                          const std::map<std::string, std::string>& truth,
                                          std::span<const std::size_t> ks, std::size_t workers) {
  std::vector<std::size_t> idx;
  idx.reserve(queries.size());
  for (const auto& id : queries.ids()) {
    auto it = truth.find(id);
    if (it == truth.end()) throw Error(ErrorCode::kUnknownId, "no ground truth for query " + id, id);
    idx.push_back(gallery.index_of(it->second));
  }
  return recall_at_k(queries.matrix(), gallery.matrix(), idx, ks, workers);
}

double TimeConsistency::score() const {
  if (total() == 0) throw Error(ErrorCode::kEmptyList, "no triples to score");
  return static_cast<double>(2 * wins + ties) / static_cast<double>(2 * total());
}

TimeConsistency time_consistency(const Matrix& videos, const Matrix& attractors,
                                 const Matrix& distractors) {
  if (videos.rows() != attractors.rows() || videos.rows() != distractors.rows()) {
    throw Error(ErrorCode::kInvalidInput, "video, attractor and distractor counts differ");
  }
  check_dim(videos.cols(), attractors.cols(), "attractor");
  check_dim(videos.cols(), distractors.cols(), "distractor");
  TimeConsistency tc;
  for (std::size_t i = 0; i < videos.rows(); ++i) {
    const double a = cosine(videos.row(i), attractors.row(i));
    const double d = cosine(videos.row(i), distractors.row(i));
    if (a > d) ++tc.wins;
    else if (a == d) ++tc.ties;
    else ++tc.losses;
  }
  return tc;
}

TimeConsistency time_consistency(const EmbeddingStore& videos, const EmbeddingStore& attractors,
                                 const EmbeddingStore& distractors,
                                 const std::vector<std::string>& ids) {
  check_dim(videos.dim(), attractors.dim(), "attractor");
  check_dim(videos.dim(), distractors.dim(), "distractor");
  const std::size_t d = videos.dim();
  Matrix v(ids.size(), d), a(ids.size(), d), x(ids.size(), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::ranges::copy(videos.row(ids[i]), v.row(i).begin());
    std::ranges::copy(attractors.row(ids[i]), a.row(i).begin());
    std::ranges::copy(distractors.row(ids[i]), x.row(i).begin());
  }
  return time_consistency(v, a, x);
}

nlohmann::json EvalReport::to_json() const {
  return {{"metrics", metrics}, {"records", records}, {"config", config}};
}

}  // namespace vp
