#pragma once

#include <cstdint>
#include <vector>

#include "wsseg/grid.hpp"

namespace wsseg {

// Stand-in for scan data: an elliptical head with smooth texture, 1-3
// darker lesion blobs built as unions of jittered ellipses, plus pixel noise.
// Deterministic in the seed; lesion area is kept within [0.5%, 15%] of the
// image.

struct LesionParams {
  double center_i = 0.0, center_j = 0.0;
  double axis_a = 0.0, axis_b = 0.0;  // semi-axes, pixels
  double angle = 0.0;                 // radians
  double intensity_delta = 0.0;
};

struct Phantom {
  Image image;
  Mask truth;
  std::vector<LesionParams> lesions;
};

Phantom generate_phantom(std::uint64_t seed, int size);

// Covariance-ellipse fit of a foreground blob: centered at the centroid,
// oriented along the principal axes, radii scale * sqrt(eigenvalue). The
// scale is inflated until the ellipse covers >= 99% of the foreground.
// Degenerate foregrounds (< 3 pixels or collinear) fall back to the filled
// bounding box, flagged.
struct OvalFit {
  Mask mask;
  bool bbox_fallback = false;
  double scale_used = 0.0;
};

OvalFit fit_oval(const Mask& truth, double scale = 2.2);

}  // namespace wsseg
