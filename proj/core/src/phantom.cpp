#include "wsseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wsseg/maskstats.hpp"
#include "wsseg/rng.hpp"

namespace wsseg {

namespace {

struct Ellipse {
  double ci, cj, a, b, angle;

  bool contains(double i, double j) const {
    const double di = i - ci, dj = j - cj;
    const double c = std::cos(angle), s = std::sin(angle);
    const double u = c * di + s * dj;
    const double v = -s * di + c * dj;
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
  }
};

constexpr double kMinLesionFrac = 0.005;
constexpr double kMaxLesionFrac = 0.15;

// One lesion blob: a primary ellipse plus 2-4 jittered satellites.
struct Blob {
  std::vector<Ellipse> parts;
  LesionParams params;
};

Blob draw_blob(Rng& rng, int size, const Ellipse& head) {
  Blob blob;
  const double amax = size * 0.13, amin = size * 0.06;
  Ellipse primary;
  primary.a = rng.uniform(amin, amax);
  primary.b = rng.uniform(0.5 * primary.a, primary.a);
  primary.angle = rng.uniform(0.0, std::numbers::pi);
  // Center well inside the head so satellites stay on tissue.
  for (int attempt = 0; attempt < 64; ++attempt) {
    primary.ci = rng.uniform(primary.a, size - primary.a);
    primary.cj = rng.uniform(primary.a, size - primary.a);
    Ellipse margin = head;
    margin.a = std::max(1.0, head.a - 1.5 * primary.a);
    margin.b = std::max(1.0, head.b - 1.5 * primary.a);
    if (margin.contains(primary.ci, primary.cj)) break;
  }
  blob.parts.push_back(primary);

  const int satellites = static_cast<int>(rng.uniform_int(2, 4));
  for (int s = 0; s < satellites; ++s) {
    Ellipse sat;
    sat.ci = primary.ci + rng.uniform(-0.6, 0.6) * primary.a;
    sat.cj = primary.cj + rng.uniform(-0.6, 0.6) * primary.b;
    sat.a = rng.uniform(0.4, 0.8) * primary.a;
    sat.b = rng.uniform(0.4, 0.8) * primary.b;
    sat.angle = rng.uniform(0.0, std::numbers::pi);
    blob.parts.push_back(sat);
  }

  blob.params = {primary.ci, primary.cj, primary.a, primary.b, primary.angle,
                 -rng.uniform(0.10, 0.20)};
  return blob;
}

}  // namespace

Phantom generate_phantom(std::uint64_t seed, int size) {
  if (size < 32) throw InvalidArgument("generate_phantom: size must be >= 32");
  Rng rng(seed_for(seed, 0x7068616eULL));  // independent stream per phantom

  const double half = 0.5 * (size - 1);
  Ellipse head;
  head.ci = half + rng.uniform(-0.02, 0.02) * size;
  head.cj = half + rng.uniform(-0.02, 0.02) * size;
  head.a = size * rng.uniform(0.38, 0.42);
  head.b = size * rng.uniform(0.42, 0.46);
  head.angle = rng.uniform(-0.3, 0.3);

  // Smooth intensity texture: a few low-frequency cosines.
  struct Wave {
    double fi, fj, phase, amp;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 3; ++k) {
    waves.push_back({rng.uniform(0.5, 2.5), rng.uniform(0.5, 2.5),
                     rng.uniform(0.0, 2.0 * std::numbers::pi), rng.uniform(0.02, 0.04)});
  }

  const auto min_px = static_cast<std::int64_t>(kMinLesionFrac * size * size);
  const auto max_px = static_cast<std::int64_t>(kMaxLesionFrac * size * size);

  for (int attempt = 0; attempt < 100; ++attempt) {
    const int n_lesions = static_cast<int>(rng.uniform_int(1, 3));
    std::vector<Blob> blobs;
    for (int b = 0; b < n_lesions; ++b) blobs.push_back(draw_blob(rng, size, head));

    Mask truth(size, size, 0);
    std::int64_t fg = 0;
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) {
        if (!head.contains(i, j)) continue;
        for (const Blob& blob : blobs) {
          bool inside = false;
          for (const Ellipse& e : blob.parts) {
            if (e.contains(i, j)) {
              inside = true;
              break;
            }
          }
          if (inside) {
            truth.at(i, j) = 1;
            ++fg;
            break;
          }
        }
      }
    }
    if (fg < min_px || fg > max_px) continue;  // redraw lesions

    Image img(size, size);
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) {
        double v = 0.05;  // background air
        if (head.contains(i, j)) {
          v = 0.45;
          for (const Wave& w : waves) {
            v += w.amp * std::cos(2.0 * std::numbers::pi * (w.fi * i + w.fj * j) / size + w.phase);
          }
          if (truth.at(i, j)) {
            // darker than surrounding tissue by the owning blob's delta
            for (const Blob& blob : blobs) {
              bool inside = false;
              for (const Ellipse& e : blob.parts) {
                if (e.contains(i, j)) {
                  inside = true;
                  break;
                }
              }
              if (inside) {
                v += blob.params.intensity_delta;
                break;
              }
            }
          }
        }
        v += rng.normal(0.0, 0.02);
        img.at(i, j) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }

    Phantom p{std::move(img), std::move(truth), {}};
    for (const Blob& blob : blobs) p.lesions.push_back(blob.params);
    return p;
  }
  throw NumericError("generate_phantom: could not satisfy lesion-area bounds for seed " +
                     std::to_string(seed));
}

OvalFit fit_oval(const Mask& truth, double scale) {
  if (scale <= 0.0) throw InvalidArgument("fit_oval: scale must be > 0");
  const PixelMoments m = foreground_moments(truth);
  if (m.count == 0) throw InvalidArgument("fit_oval: empty foreground");

  if (m.degenerate()) {
    // Bounding-box fallback for point-like or collinear blobs.
    int i0 = truth.height(), i1 = -1, j0 = truth.width(), j1 = -1;
    for (int i = 0; i < truth.height(); ++i) {
      for (int j = 0; j < truth.width(); ++j) {
        if (!truth.at(i, j)) continue;
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
        j0 = std::min(j0, j);
        j1 = std::max(j1, j);
      }
    }
    Mask box(truth.height(), truth.width(), 0);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) box.at(i, j) = 1;
    return {std::move(box), true, 0.0};
  }

  const double c00 = m.cov_ii(), c01 = m.cov_ij(), c11 = m.cov_jj();
  // 2x2 symmetric eigendecomposition, closed form.
  const double tr = c00 + c11;
  const double det = c00 * c11 - c01 * c01;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double l1 = 0.5 * tr + disc;
  const double l2 = std::max(0.5 * tr - disc, 1e-12);
  double angle;  // principal axis direction in (i,j) coordinates
  if (std::abs(c01) > 1e-300) {
    angle = std::atan2(l1 - c00, c01);
  } else {
    angle = (c00 >= c11) ? 0.0 : 0.5 * std::numbers::pi;
  }

  const double mu_i = m.mean_i(), mu_j = m.mean_j();
  const auto rasterize = [&](double s) {
    Mask oval(truth.height(), truth.width(), 0);
    const double ra = s * std::sqrt(l1), rb = s * std::sqrt(l2);
    const double c = std::cos(angle), sn = std::sin(angle);
    for (int i = 0; i < truth.height(); ++i) {
      for (int j = 0; j < truth.width(); ++j) {
        const double di = i - mu_i, dj = j - mu_j;
        const double u = c * di + sn * dj;
        const double v = -sn * di + c * dj;
        if ((u * u) / (ra * ra) + (v * v) / (rb * rb) <= 1.0) oval.at(i, j) = 1;
      }
    }
    return oval;
  };

  double s = scale;
  for (int iter = 0; iter < 64; ++iter, s *= 1.1) {
    Mask oval = rasterize(s);
    std::int64_t covered = 0;
    for (size_t k = 0; k < truth.size(); ++k) covered += (truth.data()[k] && oval.data()[k]);
    if (static_cast<double>(covered) >= 0.99 * static_cast<double>(m.count)) {
      return {std::move(oval), false, s};
    }
  }
  throw NumericError("fit_oval: coverage target unreachable");
}

}  // namespace wsseg
