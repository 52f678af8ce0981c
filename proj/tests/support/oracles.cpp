#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

double naive_dsc(const wsseg::Mask& pred, const wsseg::Mask& truth) {
  long long inter = 0, np = 0, ng = 0;
  for (int i = 0; i < pred.height(); ++i) {
    for (int j = 0; j < pred.width(); ++j) {
      const bool p = pred.at(i, j) != 0;
      const bool g = truth.at(i, j) != 0;
      if (p && g) ++inter;
      if (p) ++np;
      if (g) ++ng;
    }
  }
  if (np + ng == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

double naive_background_weight(const std::vector<wsseg::Mask>& batch) {
  long long n1 = 0, n0 = 0;
  for (const auto& m : batch) {
    for (int i = 0; i < m.height(); ++i) {
      for (int j = 0; j < m.width(); ++j) {
        if (m.at(i, j)) {
          ++n1;
        } else {
          ++n0;
        }
      }
    }
  }
  if (n0 == 0 || n1 == 0) return 1.0;
  return static_cast<double>(n1) / static_cast<double>(n0);
}

wsseg::WeightMap naive_moi1(const wsseg::Mask& mask, double epsilon) {
  long long n = 0, si = 0, sj = 0;
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j)) {
        ++n;
        si += i;
        sj += j;
      }
    }
  }
  wsseg::WeightMap wm(mask.height(), mask.width(), 1.0f);
  if (n == 0) return wm;
  const double ci = std::lround(static_cast<double>(si) / static_cast<double>(n));
  const double cj = std::lround(static_cast<double>(sj) / static_cast<double>(n));

  double maxd = 0.0;
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (!mask.at(i, j)) continue;
      const double di = i - ci, dj = j - cj;
      maxd = std::max(maxd, std::sqrt(di * di + dj * dj));
    }
  }
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (!mask.at(i, j)) continue;
      const double di = i - ci, dj = j - cj;
      const double d = std::sqrt(di * di + dj * dj);
      wm.at(i, j) = static_cast<float>(1.0 - d / (maxd + epsilon));
    }
  }
  return wm;
}

wsseg::WeightMap naive_moi2(const wsseg::Mask& mask, double epsilon) {
  long long n = 0, si = 0, sj = 0, sii = 0, sjj = 0, sij = 0;
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (!mask.at(i, j)) continue;
      ++n;
      si += i;
      sj += j;
      sii += static_cast<long long>(i) * i;
      sjj += static_cast<long long>(j) * j;
      sij += static_cast<long long>(i) * j;
    }
  }
  if (n < 3) return naive_moi1(mask, epsilon);
  const double mu_i = static_cast<double>(si) / static_cast<double>(n);
  const double mu_j = static_cast<double>(sj) / static_cast<double>(n);
  const double denom = static_cast<double>(n) * static_cast<double>(n - 1);
  const double c00 = static_cast<double>(n * sii - si * si) / denom;
  const double c11 = static_cast<double>(n * sjj - sj * sj) / denom;
  const double c01 = static_cast<double>(n * sij - si * sj) / denom;
  const double det = c00 * c11 - c01 * c01;
  if (det <= 0.0) return naive_moi1(mask, epsilon);
  const double inv00 = c11 / det;
  const double inv01 = -c01 / det;
  const double inv11 = c00 / det;

  auto mahal = [&](int i, int j) {
    const double di = i - mu_i, dj = j - mu_j;
    const double q = inv00 * di * di + 2.0 * inv01 * di * dj + inv11 * dj * dj;
    return std::sqrt(q < 0.0 ? 0.0 : q);
  };

  double maxd = 0.0;
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j)) maxd = std::max(maxd, mahal(i, j));
    }
  }
  wsseg::WeightMap wm(mask.height(), mask.width(), 1.0f);
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j)) wm.at(i, j) = static_cast<float>(1.0 - mahal(i, j) / (maxd + epsilon));
    }
  }
  return wm;
}

double naive_bce(const std::vector<double>& p, const std::vector<double>& y, double w0) {
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], 1e-7, 1.0 - 1e-7);
    const double w = y[i] == 0.0 ? w0 : 1.0;
    sum += w * (-(y[i] * std::log(pc)) - (1.0 - y[i]) * std::log(1.0 - pc));
  }
  return sum / static_cast<double>(p.size());
}

double central_diff(std::vector<double>& xs, size_t i, const std::function<double()>& eval,
                    double h) {
  const double orig = xs[i];
  xs[i] = orig + h;
  const double fp = eval();
  xs[i] = orig - h;
  const double fm = eval();
  xs[i] = orig;
  return (fp - fm) / (2.0 * h);
}

double gradient_rel_error(const std::vector<double>& analytic, const std::vector<double>& fd) {
  double max_diff = 0.0, scale = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(analytic[i] - fd[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(fd[i])});
  }
  return max_diff / (scale + 1e-12);
}

std::vector<double> fd_gradient(std::vector<double>& xs, const std::function<double()>& eval,
                                double h) {
  std::vector<double> g(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) g[i] = central_diff(xs, i, eval, h);
  return g;
}

}  // namespace oracle
