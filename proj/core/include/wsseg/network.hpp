#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wsseg/nn_ops.hpp"
#include "wsseg/tensor.hpp"

namespace wsseg {

// Encoder/decoder segmentation network: U-Net blocks (two conv3x3 -> batch
// norm -> relu -> dropout units each), a pyramid-pooling bottleneck whose
// branches (adaptive pool to s x s, 1x1 projection to C/4 channels, bilinear
// upsample) are concatenated with the bottleneck features, an extra U-Net
// block after the pyramid, bilinear-upsample decoding with skip
// concatenations, and a sigmoid 1x1 output head. Output spatial size always
// equals the input.

struct NetConfig {
  int in_channels = 1;
  int out_channels = 1;
  int init_channels = 8;                    // reference-scale value: 32
  int depth = 3;                            // reference-scale value: 4
  std::vector<int> pyramid_scales = {1, 2, 3, 6};
  double dropout_p = 0.4;

  void validate() const;
};

enum class RunMode { train, eval };

// Ordered named parameters theta with their smoothed shadow copies, plus
// non-trainable buffers (batch-norm running statistics).
template <typename T>
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor<T>> values;
  std::vector<Tensor<T>> shadow;
  std::vector<std::string> buffer_names;
  std::vector<Tensor<T>> buffers;

  // Same parameters with the shadow promoted to the active values (the
  // evaluation-time weights).
  ParamSet ema_view() const {
    ParamSet v = *this;
    v.values = shadow;
    return v;
  }
};

// shadow <- beta * shadow + (1 - beta) * value, elementwise, once per
// mini-batch. Throws StateError on shape disagreement.
template <typename T>
void ema_update(ParamSet<T>& params, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("ema_update: beta must be in (0,1)");
  if (params.shadow.size() != params.values.size()) {
    throw StateError("ema_update: shadow not initialized");
  }
  for (size_t i = 0; i < params.values.size(); ++i) {
    if (!params.shadow[i].same_shape(params.values[i])) {
      throw StateError("ema_update: shape mismatch for " + params.names[i]);
    }
    Tensor<T>& s = params.shadow[i];
    const Tensor<T>& v = params.values[i];
    for (std::int64_t k = 0; k < v.numel(); ++k) {
      s[k] = static_cast<T>(beta * static_cast<double>(s[k]) +
                            (1.0 - beta) * static_cast<double>(v[k]));
    }
  }
}

template <typename T>
struct GradSet {
  std::vector<Tensor<T>> grads;  // aligned with ParamSet::values
};

template <typename T>
class UNet {
 public:
  explicit UNet(NetConfig cfg);

  const NetConfig& config() const { return cfg_; }

  ParamSet<T> init_params(std::uint64_t seed) const;

  struct UnitTape {
    Tensor<T> x;           // conv input
    Tensor<T> conv_out;    // pre-normalization
    Tensor<T> bn_mean, bn_invstd;
    Tensor<T> bn_y;        // relu input
    Tensor<T> drop_mask;
    Tensor<T> y;           // unit output
  };

  struct ForwardResult {
    Tensor<T> prob;
    RunMode mode = RunMode::train;
    std::vector<UnitTape> units;                 // in execution order
    std::vector<Tensor<std::int64_t>> argmax;    // one per encoder level
    std::vector<Tensor<T>> pyramid_pooled;       // per scale, pre-projection
    std::vector<std::int64_t> pyramid_sizes;     // branch pool sizes
    Tensor<T> bottleneck_out;                    // pyramid input
    Tensor<T> final_in;                          // output-head input
    std::vector<Tensor<T>> new_buffers;          // updated running stats
  };

  // Pure function of (params, x, mode, dropout_seed); running-statistic
  // updates are returned, never applied in place.
  ForwardResult forward(const ParamSet<T>& params, const Tensor<T>& x, RunMode mode,
                        std::uint64_t dropout_seed) const;

  // Gradients of a scalar loss wrt parameters and input given dL/dprob.
  struct BackwardResult {
    GradSet<T> grads;
    Tensor<T> dx;
  };
  BackwardResult backward(const ParamSet<T>& params, const ForwardResult& fwd,
                          const Tensor<T>& dprob) const;

  // Pyramid bottleneck alone (for shape checks): returns the concatenated
  // (2C)-channel feature map.
  Tensor<T> pyramid_forward(const ParamSet<T>& params, const Tensor<T>& bneck) const;

 private:
  struct ConvBnIdx {
    int w = -1, b = -1, gamma = -1, beta = -1;   // parameter slots
    int rmean = -1, rvar = -1;                   // buffer slots
    int ordinal = 0;                             // dropout stream id
  };
  struct BlockIdx {
    ConvBnIdx u1, u2;
  };
  struct ProjIdx {
    int w = -1, b = -1;
  };

  int channels_at(int level) const;  // init_channels << level

  // forward/backward helpers for one conv->bn->relu->dropout unit
  Tensor<T> unit_forward(const ConvBnIdx& u, const ParamSet<T>& params, const Tensor<T>& x,
                         RunMode mode, std::uint64_t dropout_seed, ForwardResult& out) const;
  Tensor<T> unit_backward(const ConvBnIdx& u, const ParamSet<T>& params, const UnitTape& tape,
                          RunMode mode, const Tensor<T>& dy, GradSet<T>& grads) const;

  NetConfig cfg_;
  std::vector<BlockIdx> enc_;
  BlockIdx bottleneck_;
  std::vector<ProjIdx> pyramid_;
  BlockIdx post_;
  std::vector<BlockIdx> dec_;  // indexed by level
  ProjIdx head_;

  // shape registry built at construction
  std::vector<std::string> param_names_;
  std::vector<std::vector<std::int64_t>> param_shapes_;
  std::vector<std::string> buffer_names_;
  std::vector<std::vector<std::int64_t>> buffer_shapes_;
};

extern template class UNet<float>;
extern template class UNet<double>;

// Binary checkpoint: magic, version, tensor count, then per tensor
// (name length, name, rank, dims, float32 payload), all little-endian.
// Parameter names carry a "p/" prefix, shadows "e/", buffers "b/", plus one
// "m/netconfig" metadata entry describing the architecture.
void save_params(const std::filesystem::path& path, const ParamSet<float>& params,
                 const NetConfig& cfg);
struct LoadedParams {
  ParamSet<float> params;
  NetConfig cfg;
};
LoadedParams load_params(const std::filesystem::path& path);

}  // namespace wsseg
