#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vp {

// Tolerance for the unit-norm invariant of embeddings.
inline constexpr double kUnitTolerance = 1e-5;

// A vector whose norm is within this distance of 1 is already as unit as
// binary32 storage allows; normalize() returns it untouched.
inline constexpr double kAlreadyUnit = 1e-7;

inline constexpr double kMinNorm = 1e-12;

// A point in the shared image-text embedding space. Values are stored in
// single precision; every reduction over them accumulates in double.
class Embedding {
 public:
  Embedding() = default;
  // Throws kEmptyList for an empty vector and kNonFinite for NaN/Inf.
  explicit Embedding(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  double norm() const noexcept;
  bool is_unit(double tolerance = kUnitTolerance) const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

// Dense row-major float matrix; row i is one embedding.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  static Matrix from_rows(std::span<const Embedding> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<float> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  Embedding embedding(std::size_t i) const;

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

double dot(std::span<const float> a, std::span<const float> b);
double squared_norm(std::span<const float> v);

// a.b / (|a||b|), clipped into [-1, 1]. Throws kDimMismatch, kZeroVector.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(const Embedding& a, const Embedding& b);

// Throws kZeroVector when |v| <= kMinNorm.
Embedding normalize(std::span<const float> v);
Embedding normalize(const Embedding& v);
// Normalizes a double-precision accumulator and rounds to single precision.
Embedding normalize_accumulator(std::span<const double> acc);

// normalize(arithmetic mean of vs). Throws kEmptyList, kDimMismatch,
// kZeroVector (when the mean cancels).
Embedding renorm_mean(std::span<const Embedding> vs);

}  // namespace vp
