#pragma once

#include <array>

#include "wsseg/grid.hpp"

namespace wsseg {

// Per-pixel label-confidence models for coarse oval annotations. Both assign
// every background pixel confidence 1 and every foreground pixel
//
//   phi = 1 - d / (max_fg d + epsilon)   in (0,1],
//
// where d is the pixel's distance to the annotation's center: Euclidean to
// the rounded foreground centroid for the first model, Mahalanobis under the
// foreground index covariance for the second. The max runs over foreground
// pixels only.

struct OvalStats {
  double center_i = 0.0, center_j = 0.0;  // centroid rounded to nearest pixel
  double mean_i = 0.0, mean_j = 0.0;      // unrounded centroid
  std::array<std::array<double, 2>, 2> inv_cov{};  // inverse sample covariance (N-1)
  double max_euclid = 0.0;
  double max_mahal = 0.0;
  double epsilon = 1.0;
  bool singular = false;  // covariance not invertible; Mahalanobis fields unset
};

// Computed over the mask's foreground. Throws InvalidArgument on an empty
// foreground.
OvalStats compute_oval_stats(const Mask& mask, double epsilon = 1.0);

enum class WeightFlag {
  ok,
  empty_foreground,   // no foreground pixels: map is all ones
  singular_fallback,  // covariance singular: Euclidean model used instead
};

struct WeightResult {
  WeightMap map;
  WeightFlag flag = WeightFlag::ok;
};

// First model: Euclidean distance from the oval's central pixel.
WeightResult moi1_weights(const Mask& mask, double epsilon = 1.0);

// Second model: Mahalanobis distance, accounting for the oval's orientation
// and anisotropy. Falls back to the first model when the foreground
// covariance is singular.
WeightResult moi2_weights(const Mask& mask, double epsilon = 1.0);

// Elementwise x^n confidence sharpening; n = 1 returns the input bits
// unchanged. Throws InvalidArgument for n <= 0.
WeightMap power_transform(const WeightMap& wm, double n);

}  // namespace wsseg
