#pragma once

#include "wsseg/tensor.hpp"

namespace wsseg {

// Combined objective: alpha * weighted BCE + (1 - alpha) * Dice, where the
// BCE term is class-weighted (background weight N1/N0) and each positive
// pixel's log-probability is additionally scaled by its label confidence phi.
// Confidence never touches the negative term. The BCE sum is divided by the
// pixel count so alpha keeps its meaning at any resolution.

struct LossConfig {
  double alpha = 0.5;
  double dice_epsilon = 1.0;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("loss: alpha must be in (0,1]");
    if (!(dice_epsilon > 0.0)) throw InvalidArgument("loss: dice_epsilon must be > 0");
  }
};

struct ClassWeights {
  double background_weight = 1.0;  // N1 / N0; foreground weight is 1
  bool fallback = false;           // single-class batch, weights forced to 1
};

// Counted over the whole batch of masks.
template <typename T>
ClassWeights class_weights(const Tensor<T>& y);

template <typename T>
struct LossResult {
  double total = 0.0;
  double bce = 0.0;   // normalized, before the alpha blend
  double dice = 0.0;  // before the (1 - alpha) blend
  Tensor<T> dp;       // dL/dp
};

// Probabilities are clamped to [1e-7, 1 - 1e-7] before the logs; the
// gradient is zero where the clamp is active.
template <typename T>
LossResult<T> combined_loss(const Tensor<T>& p, const Tensor<T>& y, const Tensor<T>& phi,
                            const ClassWeights& cw, const LossConfig& cfg);

extern template ClassWeights class_weights(const Tensor<float>&);
extern template ClassWeights class_weights(const Tensor<double>&);
extern template LossResult<float> combined_loss(const Tensor<float>&, const Tensor<float>&,
                                                const Tensor<float>&, const ClassWeights&,
                                                const LossConfig&);
extern template LossResult<double> combined_loss(const Tensor<double>&, const Tensor<double>&,
                                                 const Tensor<double>&, const ClassWeights&,
                                                 const LossConfig&);

}  // namespace wsseg
