#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "wsseg/grid.hpp"
#include "wsseg/rng.hpp"
#include "wsseg/tensor.hpp"

namespace testutil {

// Scoped temporary directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("wsseg_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline wsseg::Image random_image(wsseg::Rng& rng, int h, int w, float lo = 0.0f, float hi = 1.0f) {
  wsseg::Image img(h, w);
  for (auto& v : img.vec()) v = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

// Filled rotated ellipse mask; the shapes the inaccuracy models are built for.
inline wsseg::Mask oval_mask(int h, int w, double ci, double cj, double a, double b,
                             double angle) {
  wsseg::Mask m(h, w, 0);
  const double c = std::cos(angle), s = std::sin(angle);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double di = i - ci, dj = j - cj;
      const double u = c * di + s * dj;
      const double v = -s * di + c * dj;
      if ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0) m.at(i, j) = 1;
    }
  }
  return m;
}

inline wsseg::Mask random_oval_mask(wsseg::Rng& rng, int size) {
  for (;;) {
    const double a = rng.uniform(size * 0.12, size * 0.3);
    const double b = rng.uniform(0.5 * a, a);
    const double ci = rng.uniform(a, size - 1 - a);
    const double cj = rng.uniform(a, size - 1 - a);
    const double angle = rng.uniform(0.0, 3.141592653589793);
    wsseg::Mask m = oval_mask(size, size, ci, cj, a, b, angle);
    if (wsseg::count_foreground(m) >= 8) return m;
  }
}

template <typename T>
wsseg::Tensor<T> random_tensor(wsseg::Rng& rng, std::vector<std::int64_t> shape, double lo = -1.0,
                               double hi = 1.0) {
  wsseg::Tensor<T> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

}  // namespace testutil
