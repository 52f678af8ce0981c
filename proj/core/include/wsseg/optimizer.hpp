#pragma once

#include "wsseg/network.hpp"

namespace wsseg {

// Adam with coupled L2 regularization: the weight-decay term is added to the
// gradient before the moment updates.
struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m, v;
  std::int64_t t = 0;

  static AdamState zeros_like(const ParamSet<T>& params) {
    AdamState s;
    for (const auto& p : params.values) {
      s.m.emplace_back(p.shape());
      s.v.emplace_back(p.shape());
    }
    return s;
  }
};

// One bias-corrected step. Throws NumericError naming the tensor on a
// non-finite gradient.
template <typename T>
void adam_step(ParamSet<T>& params, const GradSet<T>& grads, AdamState<T>& state, double lr,
               double weight_decay, const AdamConfig& cfg = {});

extern template void adam_step(ParamSet<float>&, const GradSet<float>&, AdamState<float>&, double,
                               double, const AdamConfig&);
extern template void adam_step(ParamSet<double>&, const GradSet<double>&, AdamState<double>&,
                               double, double, const AdamConfig&);

// One-cycle schedule: cosine rise from max_lr/25 to max_lr over the first 30%
// of steps, cosine anneal to max_lr/1e4 over the rest. Continuous with a
// single peak; the peak value is returned exactly at the phase boundary.
double one_cycle_lr(std::int64_t step, std::int64_t total_steps, double max_lr);

}  // namespace wsseg
