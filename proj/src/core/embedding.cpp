#include "core/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace vp {

namespace {

void check_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kDimMismatch,
                "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

Embedding::Embedding(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::kEmptyList, "embedding has no coordinates");
  for (float x : values_) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFinite, "embedding has a non-finite entry");
  }
}

double Embedding::norm() const noexcept { return std::sqrt(squared_norm(values_)); }

bool Embedding::is_unit(double tolerance) const noexcept {
  return !values_.empty() && std::abs(norm() - 1.0) <= tolerance;
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kRaggedMatrix, "matrix payload does not match " +
                                              std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::from_rows(std::span<const Embedding> rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().dim();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].dim() != cols) {
      throw Error(ErrorCode::kRaggedMatrix, "row " + std::to_string(i) + " has dim " +
                                                std::to_string(rows[i].dim()) + ", expected " +
                                                std::to_string(cols));
    }
    std::ranges::copy(rows[i].values(), m.row(i).begin());
  }
  return m;
}

Embedding Matrix::embedding(std::size_t i) const {
  auto r = row(i);
  return Embedding(std::vector<float>(r.begin(), r.end()));
}

double dot(std::span<const float> a, std::span<const float> b) {
  check_same_dim(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double squared_norm(std::span<const float> v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return acc;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  check_same_dim(a.size(), b.size());
  const double aa = squared_norm(a);
  const double bb = squared_norm(b);
  if (aa <= kMinNorm * kMinNorm || bb <= kMinNorm * kMinNorm) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  // sqrt(aa * bb) rather than sqrt(aa) * sqrt(bb): symmetric, and exactly 1
  // for identical inputs.
  const double c = dot(a, b) / std::sqrt(aa * bb);
  return std::clamp(c, -1.0, 1.0);
}

double cosine(const Embedding& a, const Embedding& b) { return cosine(a.values(), b.values()); }

Embedding normalize_accumulator(std::span<const double> acc) {
  double sq = 0.0;
  for (double x : acc) sq += x * x;
  const double n = std::sqrt(sq);
  if (!(n > kMinNorm)) throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  std::vector<float> out(acc.size());
  if (std::abs(n - 1.0) <= kAlreadyUnit) {
    std::ranges::transform(acc, out.begin(), [](double x) { return static_cast<float>(x); });
  } else {
    std::ranges::transform(acc, out.begin(), [n](double x) { return static_cast<float>(x / n); });
  }
  return Embedding(std::move(out));
}

Embedding normalize(std::span<const float> v) {
  std::vector<double> acc(v.begin(), v.end());
  return normalize_accumulator(acc);
}

Embedding normalize(const Embedding& v) { return normalize(v.values()); }

Embedding renorm_mean(std::span<const Embedding> vs) {
  if (vs.empty()) throw Error(ErrorCode::kEmptyList, "mean of an empty list");
  const std::size_t d = vs.front().dim();
  std::vector<double> acc(d, 0.0);
  for (const auto& v : vs) {
    check_same_dim(d, v.dim());
    auto values = v.values();
    for (std::size_t i = 0; i < d; ++i) acc[i] += values[i];
  }
  const double inv = 1.0 / static_cast<double>(vs.size());
  for (double& x : acc) x *= inv;
  return normalize_accumulator(acc);
}

}  // namespace vp
