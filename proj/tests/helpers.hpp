#pragma once

#include <cmath>
#include <vector>

#include "bcp/common.hpp"

namespace bcp::testing {

/// Standard error of a chain mean from non-overlapping batch means.
inline double batch_means_se(const Vector& chain, int batches = 50) {
  const Eigen::Index len = chain.size() / batches;
  const double mean = chain.head(len * batches).mean();
  double ss = 0.0;
  for (int b = 0; b < batches; ++b) {
    const double m = chain.segment(b * len, len).mean();
    ss += (m - mean) * (m - mean);
  }
  return std::sqrt(ss / (batches - 1) / batches);
}

inline double iid_se(const Vector& x) {
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1) /
                   static_cast<double>(x.size()));
}

inline Matrix random_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace bcp::testing
