#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "classifier/classifier.hpp"
#include "fusion/fusion.hpp"
#include "store/store.hpp"

namespace vp {

struct Prediction {
  std::string video_id;
  std::size_t class_index = 0;
  std::string predicted_class;
  double score = 0.0;  // cosine with the predicted row
  // Top entries, descending score, ties by ascending class index.
  std::vector<std::pair<std::string, double>> ranked;
};

// Exact nearest row by cosine; ties go to the lowest class index. `top_m`
// limits the ranked list (0 = none). Throws kEmptyClassifier, kDimMismatch.
Prediction classify(const std::string& video_id, std::span<const float> vector,
                    const ClassifierMatrix& classifier, std::size_t top_m = 0);
Prediction classify(const EnhancedVisual& fused, const ClassifierMatrix& classifier,
                    std::size_t top_m = 0);

// Predictions in video order, computed in parallel.
std::vector<Prediction> classify_all(std::span<const EnhancedVisual> fused,
                                     const ClassifierMatrix& classifier, std::size_t top_m,
                                     std::size_t workers);

// Fraction of predictions whose class equals the label of their video.
// Throws kMissingLabel, kEmptyList.
double top1_accuracy(std::span<const Prediction> predictions,
                     const std::map<std::string, std::string>& labels);

// 1-based rank of gallery row `truth` for the query, by descending cosine
// with ties to the lower gallery index.
std::size_t ground_truth_rank(std::span<const float> query, const Matrix& gallery, std::size_t truth);

// R@K for each K: fraction of queries i whose truth[i] ranks within K.
// Throws kEmptyList, kDimMismatch, kInvalidInput for a bad truth index.
std::map<std::size_t, double> recall_at_k(const Matrix& queries, const Matrix& gallery,
                                          std::span<const std::size_t> truth,
                                          std::span<const std::size_t> ks, std::size_t workers = 1);

// Id-addressed form: truth maps query id -> gallery id. Throws kUnknownId.
std::map<std::size_t, double> recall_at_k(const EmbeddingStore& queries, const EmbeddingStore& gallery,
                                          const std::map<std::string, std::string>& truth,
                                          std::span<const std::size_t> ks, std::size_t workers = 1);

// Win/tie/loss counts of cos(v, attractor) against cos(v, distractor).
struct TimeConsistency {
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;

  std::size_t total() const noexcept { return wins + ties + losses; }
  // (2 wins + ties) / (2 total); a tie counts one half.
  double score() const;
};

TimeConsistency time_consistency(const Matrix& videos, const Matrix& attractors,
                                 const Matrix& distractors);
// Triples joined by video id over `ids`. Throws kUnknownId, kDimMismatch.
TimeConsistency time_consistency(const EmbeddingStore& videos, const EmbeddingStore& attractors,
                                 const EmbeddingStore& distractors,
                                 const std::vector<std::string>& ids);

// Named metrics in [0, 1] with per-item records and the producing config.
struct EvalReport {
  std::map<std::string, double> metrics;
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const;
};

}  // namespace vp
