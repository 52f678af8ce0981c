#include "wsseg/loss.hpp"

#include <cmath>

namespace wsseg {

namespace {
constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;
}  // namespace

template <typename T>
ClassWeights class_weights(const Tensor<T>& y) {
  std::int64_t n1 = 0, n0 = 0;
  for (std::int64_t i = 0; i < y.numel(); ++i) {
    if (y[i] == T{1}) {
      ++n1;
    } else if (y[i] == T{0}) {
      ++n0;
    } else {
      throw InvalidArgument("class_weights: mask value not in {0,1}");
    }
  }
  if (n0 == 0 || n1 == 0) return {1.0, true};
  return {static_cast<double>(n1) / static_cast<double>(n0), false};
}

template <typename T>
LossResult<T> combined_loss(const Tensor<T>& p, const Tensor<T>& y, const Tensor<T>& phi,
                            const ClassWeights& cw, const LossConfig& cfg) {
  cfg.validate();
  if (!p.same_shape(y) || !p.same_shape(phi)) {
    throw ShapeError("combined_loss: p " + Tensor<T>::shape_str(p.shape()) + ", y " +
                     Tensor<T>::shape_str(y.shape()) + ", phi " +
                     Tensor<T>::shape_str(phi.shape()));
  }
  const std::int64_t n = p.numel();
  const double inv_n = 1.0 / static_cast<double>(n);

  double bce_sum = 0.0;
  double sum_py = 0.0, sum_p2 = 0.0, sum_y2 = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double pv = p[i];
    if (!std::isfinite(pv)) throw InvalidArgument("combined_loss: non-finite probability");
    const double pc = pv < kClampLo ? kClampLo : (pv > kClampHi ? kClampHi : pv);
    const double yv = y[i];
    const double w = yv == 0.0 ? cw.background_weight : 1.0;
    bce_sum += w * (-(static_cast<double>(phi[i]) * yv * std::log(pc)) -
                    (1.0 - yv) * std::log(1.0 - pc));
    sum_py += pc * yv;
    sum_p2 += pc * pc;
    sum_y2 += yv * yv;
  }
  const double dice_den = sum_p2 + sum_y2 + cfg.dice_epsilon;
  const double dice_num = 2.0 * sum_py + cfg.dice_epsilon;
  const double dice = 1.0 - dice_num / dice_den;
  const double bce = bce_sum * inv_n;

  LossResult<T> out;
  out.bce = bce;
  out.dice = dice;
  out.total = cfg.alpha * bce + (1.0 - cfg.alpha) * dice;
  out.dp = Tensor<T>(p.shape());
  const double dice_den2 = dice_den * dice_den;
  for (std::int64_t i = 0; i < n; ++i) {
    const double pv = p[i];
    if (pv < kClampLo || pv > kClampHi) continue;  // clamp active: locally constant
    const double yv = y[i];
    const double w = yv == 0.0 ? cw.background_weight : 1.0;
    const double dbce = w * (-(static_cast<double>(phi[i]) * yv / pv) + (1.0 - yv) / (1.0 - pv));
    const double ddice = -(2.0 * yv * dice_den - dice_num * 2.0 * pv) / dice_den2;
    out.dp[i] = static_cast<T>(cfg.alpha * inv_n * dbce + (1.0 - cfg.alpha) * ddice);
  }
  return out;
}

template ClassWeights class_weights(const Tensor<float>&);
template ClassWeights class_weights(const Tensor<double>&);
template LossResult<float> combined_loss(const Tensor<float>&, const Tensor<float>&,
                                         const Tensor<float>&, const ClassWeights&,
                                         const LossConfig&);
template LossResult<double> combined_loss(const Tensor<double>&, const Tensor<double>&,
                                          const Tensor<double>&, const ClassWeights&,
                                          const LossConfig&);

}  // namespace wsseg
