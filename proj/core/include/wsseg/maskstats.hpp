#pragma once

#include <cstdint>

#include "wsseg/grid.hpp"

namespace wsseg {

// First and second moments of the foreground pixel index set, accumulated in
// exact integer arithmetic so symmetric masks give bitwise-symmetric
// covariances.
struct PixelMoments {
  std::int64_t count = 0;
  std::int64_t sum_i = 0, sum_j = 0;
  std::int64_t sum_ii = 0, sum_jj = 0, sum_ij = 0;

  double mean_i() const { return static_cast<double>(sum_i) / static_cast<double>(count); }
  double mean_j() const { return static_cast<double>(sum_j) / static_cast<double>(count); }

  // Scatter entries N*sum_xx - sum_x*sum_x (exact integers).
  std::int64_t scatter_ii() const { return count * sum_ii - sum_i * sum_i; }
  std::int64_t scatter_jj() const { return count * sum_jj - sum_j * sum_j; }
  std::int64_t scatter_ij() const { return count * sum_ij - sum_i * sum_j; }

  // Sample covariance (N-1 denominator).
  double cov_ii() const { return static_cast<double>(scatter_ii()) / denom(); }
  double cov_jj() const { return static_cast<double>(scatter_jj()) / denom(); }
  double cov_ij() const { return static_cast<double>(scatter_ij()) / denom(); }

  // Exact rank test: the foreground is collinear (or has < 3 pixels) iff the
  // scatter determinant vanishes.
  bool degenerate() const {
    if (count < 3) return true;
    const __int128 det = static_cast<__int128>(scatter_ii()) * scatter_jj() -
                         static_cast<__int128>(scatter_ij()) * scatter_ij();
    return det <= 0;
  }

 private:
  double denom() const { return static_cast<double>(count) * static_cast<double>(count - 1); }
};

inline PixelMoments foreground_moments(const Mask& mask) {
  PixelMoments m;
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j) == 0) continue;
      ++m.count;
      m.sum_i += i;
      m.sum_j += j;
      m.sum_ii += static_cast<std::int64_t>(i) * i;
      m.sum_jj += static_cast<std::int64_t>(j) * j;
      m.sum_ij += static_cast<std::int64_t>(i) * j;
    }
  }
  return m;
}

}  // namespace wsseg
