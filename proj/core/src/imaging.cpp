#include "wsseg/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace wsseg {

Image minmax_normalize(const Image& img) {
  require_finite(img, "minmax_normalize");
  const auto [mn_it, mx_it] = std::minmax_element(img.vec().begin(), img.vec().end());
  const float mn = *mn_it, mx = *mx_it;
  Image out(img.height(), img.width());
  if (mn == mx) return out;  // constant image -> all zeros
  const float range = mx - mn;
  for (size_t i = 0; i < img.size(); ++i) out.data()[i] = (img.data()[i] - mn) / range;
  return out;
}

template <typename T>
Grid<T> center_crop(const Grid<T>& g, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0 || out_h > g.height() || out_w > g.width()) {
    throw InvalidArgument("center_crop: requested " + std::to_string(out_h) + "x" +
                          std::to_string(out_w) + " from " + std::to_string(g.height()) + "x" +
                          std::to_string(g.width()));
  }
  const int top = (g.height() - out_h) / 2;
  const int left = (g.width() - out_w) / 2;
  Grid<T> out(out_h, out_w);
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < out_w; ++j) out.at(i, j) = g.at(top + i, left + j);
  return out;
}

namespace {

// Corner-aligned source coordinate for output index x.
inline double src_coord(int x, int in_size, int out_size) {
  if (out_size == 1) return 0.0;
  return static_cast<double>(x) * (in_size - 1) / (out_size - 1);
}

}  // namespace

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("resize_bilinear: output size must be >= 1");
  Image out(out_h, out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    const double sy = src_coord(oy, img.height(), out_h);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      const double sx = src_coord(ox, img.width(), out_w);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double fx = sx - x0;
      const double v = (1.0 - fy) * ((1.0 - fx) * img.at(y0, x0) + fx * img.at(y0, x1)) +
                       fy * ((1.0 - fx) * img.at(y1, x0) + fx * img.at(y1, x1));
      out.at(oy, ox) = static_cast<float>(v);
    }
  }
  return out;
}

template <typename T>
Grid<T> resize_nearest(const Grid<T>& g, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("resize_nearest: output size must be >= 1");
  Grid<T> out(out_h, out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    const int y = static_cast<int>(std::lround(src_coord(oy, g.height(), out_h)));
    for (int ox = 0; ox < out_w; ++ox) {
      const int x = static_cast<int>(std::lround(src_coord(ox, g.width(), out_w)));
      out.at(oy, ox) = g.at(y, x);
    }
  }
  return out;
}

template Grid<float> center_crop(const Grid<float>&, int, int);
template Grid<std::uint8_t> center_crop(const Grid<std::uint8_t>&, int, int);
template Grid<float> resize_nearest(const Grid<float>&, int, int);
template Grid<std::uint8_t> resize_nearest(const Grid<std::uint8_t>&, int, int);

}  // namespace wsseg
