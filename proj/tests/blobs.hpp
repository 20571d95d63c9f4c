#pragma once

#include <random>

#include "topodesc/rusboost.hpp"

namespace topodesc::testing {

/// Two overlapping Gaussian blobs in `dims` dimensions; class 1 is the
/// minority with the given fraction and is shifted by `separation` on every axis.
inline FeatureMatrix imbalanced_blobs(std::size_t rows, std::size_t dims, double minority_fraction,
                                      double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  FeatureMatrix m(rows, dims);
  const auto positives = static_cast<std::size_t>(std::llround(minority_fraction * static_cast<double>(rows)));
  for (std::size_t r = 0; r < rows; ++r) {
    const bool positive = r < positives;
    m.labels[r] = positive ? 1 : 0;
    for (std::size_t c = 0; c < dims; ++c) m.at(r, c) = noise(rng) + (positive ? separation : 0.0);
  }
  return m;
}

inline double minority_recall(const FeatureMatrix& data, const std::vector<std::uint8_t>& predicted) {
  std::size_t hit = 0, total = 0;
  for (std::size_t r = 0; r < data.rows; ++r)
    if (data.labels[r]) {
      ++total;
      hit += predicted[r];
    }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

}  // namespace topodesc::testing
