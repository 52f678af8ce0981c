#pragma once

#include <cstdint>

#include "wsseg/grid.hpp"
#include "wsseg/sample.hpp"

namespace wsseg {

// Training-time augmentation: horizontal flip, rotation in [-15, +15]
// degrees, random-sized crop of 70-100% area resized back, and elastic
// deformation (Gaussian-smoothed displacement field). Each is applied with
// probability 0.5, and the identical spatial transform hits image, mask and
// weight map: bilinear sampling for the image, nearest for mask and weight
// map, fill values 0 / 0 / 1 respectively.

struct ElasticParams {
  double sigma = 8.0;  // smoothing radius of the displacement field, pixels
  double alpha = 20.0;  // displacement magnitude, pixels
};

struct AugmentParams {
  bool flip = false;
  bool rotate = false;
  double angle = 0.0;  // radians
  bool crop = false;
  double crop_area_frac = 1.0;
  double crop_pos_i = 0.5, crop_pos_j = 0.5;  // fractional placement of the crop window
  bool elastic = false;
  std::uint64_t elastic_seed = 0;
  ElasticParams elastic_cfg;
};

// Draw the transform parameters for one sample deterministically.
AugmentParams draw_augment_params(std::uint64_t seed);

// Apply a fixed set of transform parameters (flip, rotate, crop, elastic, in
// that order) to all three planes jointly.
SampleRecord apply_augment(const SampleRecord& sample, const AugmentParams& params);

// Convenience: draw + apply.
SampleRecord augment(const SampleRecord& sample, std::uint64_t seed);

// Individual transforms, exposed for tests.
template <typename T>
Grid<T> hflip(const Grid<T>& g);

// Displacement fields (di, dj) for the elastic warp: uniform noise in [-1,1]
// blurred by a Gaussian of width sigma, rescaled to peak magnitude alpha.
struct DisplacementField {
  Grid<float> di;
  Grid<float> dj;
};
DisplacementField elastic_field(int height, int width, const ElasticParams& cfg,
                                std::uint64_t seed);

Image warp_bilinear(const Image& img, const DisplacementField& field, float fill);
template <typename T>
Grid<T> warp_nearest(const Grid<T>& g, const DisplacementField& field, T fill);

Image rotate_bilinear(const Image& img, double radians, float fill);
template <typename T>
Grid<T> rotate_nearest(const Grid<T>& g, double radians, T fill);

extern template Grid<float> hflip(const Grid<float>&);
extern template Grid<std::uint8_t> hflip(const Grid<std::uint8_t>&);
extern template Grid<float> warp_nearest(const Grid<float>&, const DisplacementField&, float);
extern template Grid<std::uint8_t> warp_nearest(const Grid<std::uint8_t>&, const DisplacementField&,
                                                std::uint8_t);
extern template Grid<float> rotate_nearest(const Grid<float>&, double, float);
extern template Grid<std::uint8_t> rotate_nearest(const Grid<std::uint8_t>&, double, std::uint8_t);

}  // namespace wsseg
