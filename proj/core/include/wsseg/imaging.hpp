#pragma once

#include "wsseg/grid.hpp"

namespace wsseg {

// (v - min) / (max - min) per pixel; a constant image maps to all zeros.
// Throws InvalidArgument on non-finite input.
Image minmax_normalize(const Image& img);

// Centered sub-grid. Odd leftover margins drop the extra row/column from the
// bottom/right. Throws InvalidArgument if the requested size exceeds input.
template <typename T>
Grid<T> center_crop(const Grid<T>& g, int out_h, int out_w);

// Corner-aligned bilinear resampling (an output dimension of 1 samples
// coordinate 0). Resizing to the identical size reproduces the input bits.
Image resize_bilinear(const Image& img, int out_h, int out_w);

// Nearest-neighbour resampling on the same corner-aligned lattice; preserves
// the value set, so masks stay binary.
template <typename T>
Grid<T> resize_nearest(const Grid<T>& g, int out_h, int out_w);

extern template Grid<float> center_crop(const Grid<float>&, int, int);
extern template Grid<std::uint8_t> center_crop(const Grid<std::uint8_t>&, int, int);
extern template Grid<float> resize_nearest(const Grid<float>&, int, int);
extern template Grid<std::uint8_t> resize_nearest(const Grid<std::uint8_t>&, int, int);

}  // namespace wsseg
