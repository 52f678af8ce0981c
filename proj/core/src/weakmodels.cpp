#include "wsseg/weakmodels.hpp"

#include <cmath>
#include <limits>

#include "wsseg/maskstats.hpp"

namespace wsseg {

namespace {

double euclid_to_center(int i, int j, double ci, double cj) {
  const double di = i - ci;
  const double dj = j - cj;
  return std::sqrt(di * di + dj * dj);
}

double mahalanobis(const OvalStats& s, int i, int j) {
  const double di = i - s.mean_i;
  const double dj = j - s.mean_j;
  const double q = s.inv_cov[0][0] * di * di + 2.0 * s.inv_cov[0][1] * di * dj +
                   s.inv_cov[1][1] * dj * dj;
  return std::sqrt(q < 0.0 ? 0.0 : q);
}

}  // namespace

OvalStats compute_oval_stats(const Mask& mask, double epsilon) {
  if (epsilon <= 0.0) throw InvalidArgument("compute_oval_stats: epsilon must be > 0");
  const PixelMoments m = foreground_moments(mask);
  if (m.count == 0) throw InvalidArgument("compute_oval_stats: empty foreground");

  OvalStats s;
  s.epsilon = epsilon;
  s.mean_i = m.mean_i();
  s.mean_j = m.mean_j();
  s.center_i = std::lround(s.mean_i);
  s.center_j = std::lround(s.mean_j);
  s.singular = m.degenerate();

  if (!s.singular) {
    const double c00 = m.cov_ii(), c01 = m.cov_ij(), c11 = m.cov_jj();
    const double det = c00 * c11 - c01 * c01;
    s.inv_cov[0][0] = c11 / det;
    s.inv_cov[0][1] = -c01 / det;
    s.inv_cov[1][0] = -c01 / det;
    s.inv_cov[1][1] = c00 / det;
  }

  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j) == 0) continue;
      s.max_euclid = std::max(s.max_euclid, euclid_to_center(i, j, s.center_i, s.center_j));
      if (!s.singular) s.max_mahal = std::max(s.max_mahal, mahalanobis(s, i, j));
    }
  }
  return s;
}

WeightResult moi1_weights(const Mask& mask, double epsilon) {
  if (epsilon <= 0.0) throw InvalidArgument("moi1_weights: epsilon must be > 0");
  if (count_foreground(mask) == 0) {
    return {WeightMap(mask.height(), mask.width(), 1.0f), WeightFlag::empty_foreground};
  }
  const OvalStats s = compute_oval_stats(mask, epsilon);
  const double norm = s.max_euclid + epsilon;
  WeightMap wm(mask.height(), mask.width(), 1.0f);
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j) == 0) continue;
      const double d = euclid_to_center(i, j, s.center_i, s.center_j);
      wm.at(i, j) = static_cast<float>(1.0 - d / norm);
    }
  }
  return {std::move(wm), WeightFlag::ok};
}

WeightResult moi2_weights(const Mask& mask, double epsilon) {
  if (epsilon <= 0.0) throw InvalidArgument("moi2_weights: epsilon must be > 0");
  if (count_foreground(mask) == 0) {
    return {WeightMap(mask.height(), mask.width(), 1.0f), WeightFlag::empty_foreground};
  }
  const OvalStats s = compute_oval_stats(mask, epsilon);
  if (s.singular) {
    WeightResult r = moi1_weights(mask, epsilon);
    r.flag = WeightFlag::singular_fallback;
    return r;
  }
  const double norm = s.max_mahal + epsilon;
  WeightMap wm(mask.height(), mask.width(), 1.0f);
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j) == 0) continue;
      wm.at(i, j) = static_cast<float>(1.0 - mahalanobis(s, i, j) / norm);
    }
  }
  return {std::move(wm), WeightFlag::ok};
}

WeightMap power_transform(const WeightMap& wm, double n) {
  if (!(n > 0.0)) throw InvalidArgument("power_transform: exponent must be > 0");
  if (n == 1.0) return wm;
  WeightMap out(wm.height(), wm.width());
  for (size_t i = 0; i < wm.size(); ++i) {
    float v = static_cast<float>(std::pow(static_cast<double>(wm.data()[i]), n));
    // x^n can underflow to zero for extreme exponents; confidences stay positive.
    if (v <= 0.0f && wm.data()[i] > 0.0f) v = std::numeric_limits<float>::min();
    out.data()[i] = v;
  }
  return out;
}

}  // namespace wsseg
