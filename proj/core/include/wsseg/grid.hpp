#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wsseg/errors.hpp"

namespace wsseg {

// Row-major H x W grid. Image = float values, Mask = {0,1} labels,
// WeightMap = per-pixel label confidences in (0,1].
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : h_(height), w_(width), data_(static_cast<size_t>(height) * width, fill) {
    if (height <= 0 || width <= 0) {
      throw InvalidArgument("grid dimensions must be positive, got " +
                            std::to_string(height) + "x" + std::to_string(width));
    }
  }

  int height() const { return h_; }
  int width() const { return w_; }
  size_t size() const { return data_.size(); }

  T& at(int i, int j) {
    assert(i >= 0 && i < h_ && j >= 0 && j < w_);
    return data_[static_cast<size_t>(i) * w_ + j];
  }
  const T& at(int i, int j) const {
    assert(i >= 0 && i < h_ && j >= 0 && j < w_);
    return data_[static_cast<size_t>(i) * w_ + j];
  }
  bool in_bounds(int i, int j) const { return i >= 0 && i < h_ && j >= 0 && j < w_; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  bool same_shape(const Grid& other) const { return h_ == other.h_ && w_ == other.w_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.h_ == b.h_ && a.w_ == b.w_ && a.data_ == b.data_;
  }

 private:
  int h_ = 0;
  int w_ = 0;
  std::vector<T> data_;
};

using Image = Grid<float>;
using Mask = Grid<std::uint8_t>;
using WeightMap = Grid<float>;

inline void require_same_shape(int ah, int aw, int bh, int bw, const char* what) {
  if (ah != bh || aw != bw) {
    throw ShapeError(std::string(what) + ": " + std::to_string(ah) + "x" + std::to_string(aw) +
                     " vs " + std::to_string(bh) + "x" + std::to_string(bw));
  }
}

inline void require_finite(const Image& img, const char* what) {
  for (float v : img.vec()) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite pixel value");
  }
}

inline void require_binary(const Mask& m, const char* what) {
  for (auto v : m.vec()) {
    if (v != 0 && v != 1) throw InvalidArgument(std::string(what) + ": mask value not in {0,1}");
  }
}

inline size_t count_foreground(const Mask& m) {
  size_t n = 0;
  for (auto v : m.vec()) n += (v != 0);
  return n;
}

}  // namespace wsseg
