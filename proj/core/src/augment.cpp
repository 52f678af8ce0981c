#include "wsseg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wsseg/imaging.hpp"
#include "wsseg/rng.hpp"

namespace wsseg {

namespace {

constexpr double kMaxRotationDeg = 15.0;
constexpr double kMinCropArea = 0.70;

inline float sample_bilinear(const Image& img, double y, double x, float fill) {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0, fx = x - x0;
  auto px = [&](int i, int j) -> double {
    return img.in_bounds(i, j) ? img.at(i, j) : fill;
  };
  const double v = (1.0 - fy) * ((1.0 - fx) * px(y0, x0) + fx * px(y0, x0 + 1)) +
                   fy * ((1.0 - fx) * px(y0 + 1, x0) + fx * px(y0 + 1, x0 + 1));
  return static_cast<float>(v);
}

template <typename T>
inline T sample_nearest(const Grid<T>& g, double y, double x, T fill) {
  const int i = static_cast<int>(std::lround(y));
  const int j = static_cast<int>(std::lround(x));
  return g.in_bounds(i, j) ? g.at(i, j) : fill;
}

}  // namespace

template <typename T>
Grid<T> hflip(const Grid<T>& g) {
  Grid<T> out(g.height(), g.width());
  for (int i = 0; i < g.height(); ++i)
    for (int j = 0; j < g.width(); ++j) out.at(i, j) = g.at(i, g.width() - 1 - j);
  return out;
}

DisplacementField elastic_field(int height, int width, const ElasticParams& cfg,
                                std::uint64_t seed) {
  Rng rng(seed);
  Grid<float> di(height, width), dj(height, width);
  for (size_t k = 0; k < di.size(); ++k) {
    di.data()[k] = static_cast<float>(rng.uniform(-1.0, 1.0));
    dj.data()[k] = static_cast<float>(rng.uniform(-1.0, 1.0));
  }

  // Separable Gaussian blur, kernel truncated at 3 sigma.
  const int radius = std::max(1, static_cast<int>(std::lround(3.0 * cfg.sigma)));
  std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
  double ksum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double w = std::exp(-0.5 * (t / cfg.sigma) * (t / cfg.sigma));
    kernel[static_cast<size_t>(t + radius)] = w;
    ksum += w;
  }
  for (double& w : kernel) w /= ksum;

  auto blur = [&](Grid<float>& g) {
    Grid<float> tmp(height, width);
    for (int i = 0; i < height; ++i) {  // horizontal pass, clamped borders
      for (int j = 0; j < width; ++j) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int jj = std::clamp(j + t, 0, width - 1);
          acc += kernel[static_cast<size_t>(t + radius)] * g.at(i, jj);
        }
        tmp.at(i, j) = static_cast<float>(acc);
      }
    }
    for (int j = 0; j < width; ++j) {  // vertical pass
      for (int i = 0; i < height; ++i) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int ii = std::clamp(i + t, 0, height - 1);
          acc += kernel[static_cast<size_t>(t + radius)] * tmp.at(ii, j);
        }
        g.at(i, j) = static_cast<float>(acc);
      }
    }
  };
  blur(di);
  blur(dj);

  // Rescale so the largest displacement is alpha pixels.
  float peak = 0.0f;
  for (size_t k = 0; k < di.size(); ++k) {
    peak = std::max(peak, std::abs(di.data()[k]));
    peak = std::max(peak, std::abs(dj.data()[k]));
  }
  const float gain = peak > 0.0f ? static_cast<float>(cfg.alpha) / peak : 0.0f;
  for (size_t k = 0; k < di.size(); ++k) {
    di.data()[k] *= gain;
    dj.data()[k] *= gain;
  }
  return {std::move(di), std::move(dj)};
}

Image warp_bilinear(const Image& img, const DisplacementField& field, float fill) {
  require_same_shape(img.height(), img.width(), field.di.height(), field.di.width(),
                     "warp_bilinear");
  Image out(img.height(), img.width());
  for (int i = 0; i < img.height(); ++i)
    for (int j = 0; j < img.width(); ++j)
      out.at(i, j) = sample_bilinear(img, i + field.di.at(i, j), j + field.dj.at(i, j), fill);
  return out;
}

template <typename T>
Grid<T> warp_nearest(const Grid<T>& g, const DisplacementField& field, T fill) {
  require_same_shape(g.height(), g.width(), field.di.height(), field.di.width(), "warp_nearest");
  Grid<T> out(g.height(), g.width());
  for (int i = 0; i < g.height(); ++i)
    for (int j = 0; j < g.width(); ++j)
      out.at(i, j) = sample_nearest(g, i + field.di.at(i, j), j + field.dj.at(i, j), fill);
  return out;
}

namespace {

// Inverse-map rotation about the grid center.
template <typename T, typename Sampler>
Grid<T> rotate_impl(const Grid<T>& g, double radians, Sampler sampler) {
  Grid<T> out(g.height(), g.width());
  const double ci = 0.5 * (g.height() - 1), cj = 0.5 * (g.width() - 1);
  const double c = std::cos(radians), s = std::sin(radians);
  for (int i = 0; i < g.height(); ++i) {
    for (int j = 0; j < g.width(); ++j) {
      const double di = i - ci, dj = j - cj;
      const double si = ci + c * di - s * dj;
      const double sj = cj + s * di + c * dj;
      out.at(i, j) = sampler(si, sj);
    }
  }
  return out;
}

}  // namespace

Image rotate_bilinear(const Image& img, double radians, float fill) {
  return rotate_impl(img, radians,
                     [&](double y, double x) { return sample_bilinear(img, y, x, fill); });
}

template <typename T>
Grid<T> rotate_nearest(const Grid<T>& g, double radians, T fill) {
  return rotate_impl(g, radians, [&](double y, double x) { return sample_nearest(g, y, x, fill); });
}

AugmentParams draw_augment_params(std::uint64_t seed) {
  Rng rng(seed);
  AugmentParams p;
  p.flip = rng.bernoulli(0.5);
  p.rotate = rng.bernoulli(0.5);
  if (p.rotate) {
    p.angle = rng.uniform(-kMaxRotationDeg, kMaxRotationDeg) * std::numbers::pi / 180.0;
  }
  p.crop = rng.bernoulli(0.5);
  if (p.crop) {
    p.crop_area_frac = rng.uniform(kMinCropArea, 1.0);
    p.crop_pos_i = rng.uniform();
    p.crop_pos_j = rng.uniform();
  }
  p.elastic = rng.bernoulli(0.5);
  if (p.elastic) p.elastic_seed = rng.next_u64();
  return p;
}

SampleRecord apply_augment(const SampleRecord& sample, const AugmentParams& params) {
  require_same_shape(sample.image.height(), sample.image.width(), sample.mask.height(),
                     sample.mask.width(), "apply_augment image/mask");
  require_same_shape(sample.image.height(), sample.image.width(), sample.wmap.height(),
                     sample.wmap.width(), "apply_augment image/wmap");
  SampleRecord out = sample;

  if (params.flip) {
    out.image = hflip(out.image);
    out.mask = hflip(out.mask);
    out.wmap = hflip(out.wmap);
  }
  if (params.rotate) {
    out.image = rotate_bilinear(out.image, params.angle, 0.0f);
    out.mask = rotate_nearest(out.mask, params.angle, std::uint8_t{0});
    out.wmap = rotate_nearest(out.wmap, params.angle, 1.0f);
  }
  if (params.crop) {
    const int h = out.image.height(), w = out.image.width();
    const double side = std::sqrt(params.crop_area_frac);
    const int ch = std::max(1, static_cast<int>(std::lround(side * h)));
    const int cw = std::max(1, static_cast<int>(std::lround(side * w)));
    const int top = static_cast<int>(std::lround(params.crop_pos_i * (h - ch)));
    const int left = static_cast<int>(std::lround(params.crop_pos_j * (w - cw)));
    auto crop = [&](auto& g) {
      using G = std::decay_t<decltype(g)>;
      G sub(ch, cw);
      for (int i = 0; i < ch; ++i)
        for (int j = 0; j < cw; ++j) sub.at(i, j) = g.at(top + i, left + j);
      return sub;
    };
    out.image = resize_bilinear(crop(out.image), h, w);
    out.mask = resize_nearest(crop(out.mask), h, w);
    out.wmap = resize_nearest(crop(out.wmap), h, w);
  }
  if (params.elastic) {
    const DisplacementField field =
        elastic_field(out.image.height(), out.image.width(), params.elastic_cfg,
                      params.elastic_seed);
    out.image = warp_bilinear(out.image, field, 0.0f);
    out.mask = warp_nearest(out.mask, field, std::uint8_t{0});
    out.wmap = warp_nearest(out.wmap, field, 1.0f);
  }
  return out;
}

SampleRecord augment(const SampleRecord& sample, std::uint64_t seed) {
  return apply_augment(sample, draw_augment_params(seed));
}

template Grid<float> hflip(const Grid<float>&);
template Grid<std::uint8_t> hflip(const Grid<std::uint8_t>&);
template Grid<float> warp_nearest(const Grid<float>&, const DisplacementField&, float);
template Grid<std::uint8_t> warp_nearest(const Grid<std::uint8_t>&, const DisplacementField&,
                                         std::uint8_t);
template Grid<float> rotate_nearest(const Grid<float>&, double, float);
template Grid<std::uint8_t> rotate_nearest(const Grid<std::uint8_t>&, double, std::uint8_t);

}  // namespace wsseg
