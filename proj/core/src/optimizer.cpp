#include "wsseg/optimizer.hpp"

#include <cmath>
#include <numbers>

namespace wsseg {

template <typename T>
void adam_step(ParamSet<T>& params, const GradSet<T>& grads, AdamState<T>& state, double lr,
               double weight_decay, const AdamConfig& cfg) {
  if (grads.grads.size() != params.values.size() || state.m.size() != params.values.size()) {
    throw StateError("adam_step: state/gradients not aligned with parameters");
  }
  for (size_t i = 0; i < params.values.size(); ++i) {
    for (std::int64_t k = 0; k < grads.grads[i].numel(); ++k) {
      if (!std::isfinite(static_cast<double>(grads.grads[i][k]))) {
        throw NumericError("adam_step: non-finite gradient in tensor '" + params.names[i] + "'");
      }
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.values.size(); ++i) {
    Tensor<T>& theta = params.values[i];
    Tensor<T>& m = state.m[i];
    Tensor<T>& v = state.v[i];
    const Tensor<T>& g = grads.grads[i];
    for (std::int64_t k = 0; k < theta.numel(); ++k) {
      const double gk = static_cast<double>(g[k]) + weight_decay * static_cast<double>(theta[k]);
      const double mk = cfg.beta1 * static_cast<double>(m[k]) + (1.0 - cfg.beta1) * gk;
      const double vk = cfg.beta2 * static_cast<double>(v[k]) + (1.0 - cfg.beta2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double mhat = mk / bc1;
      const double vhat = vk / bc2;
      theta[k] = static_cast<T>(static_cast<double>(theta[k]) -
                                lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

template void adam_step(ParamSet<float>&, const GradSet<float>&, AdamState<float>&, double, double,
                        const AdamConfig&);
template void adam_step(ParamSet<double>&, const GradSet<double>&, AdamState<double>&, double,
                        double, const AdamConfig&);

double one_cycle_lr(std::int64_t step, std::int64_t total_steps, double max_lr) {
  if (total_steps <= 0) throw InvalidArgument("one_cycle_lr: total_steps must be > 0");
  if (step < 0 || step >= total_steps) {
    throw InvalidArgument("one_cycle_lr: step " + std::to_string(step) + " outside [0, " +
                          std::to_string(total_steps) + ")");
  }
  constexpr double kWarmFrac = 0.3;
  constexpr double kStartDiv = 25.0;
  constexpr double kFinalDiv = 1e4;
  const auto warm = std::max<std::int64_t>(1, std::llround(kWarmFrac * static_cast<double>(total_steps)));
  if (step < warm) {
    const double s = static_cast<double>(step) / static_cast<double>(warm);
    const double start = max_lr / kStartDiv;
    return start + (max_lr - start) * 0.5 * (1.0 - std::cos(std::numbers::pi * s));
  }
  const auto tail = std::max<std::int64_t>(1, total_steps - warm);
  const double u = static_cast<double>(step - warm) / static_cast<double>(tail);
  const double final_lr = max_lr / kFinalDiv;
  return max_lr + (final_lr - max_lr) * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
}

}  // namespace wsseg
