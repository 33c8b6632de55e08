#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "core/embedding.hpp"

namespace vp {

// Uniform double in [-1, 1) from the top 53 bits of a 64-bit draw. Unlike the
// std distributions this is identical on every standard library.
inline double uniform_pm1(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

// Unit vector with coordinates drawn uniformly from the cube, then
// normalized. Deterministic for a given generator state.
inline Embedding random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::vector<double> acc(dim);
  for (;;) {
    for (double& x : acc) x = uniform_pm1(rng);
    double sq = 0.0;
    for (double x : acc) sq += x * x;
    if (sq > 1e-6) break;
  }
  return normalize_accumulator(acc);
}

}  // namespace vp
