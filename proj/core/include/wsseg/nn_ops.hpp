#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "wsseg/rng.hpp"
#include "wsseg/tensor.hpp"

namespace wsseg {

// Layer primitives with analytic backward passes. Tensors are NCHW,
// convolution is cross-correlation, and every op is a pure function of its
// explicit inputs (dropout takes its seed, batch norm returns rather than
// mutates running statistics), so forward/backward are bit-deterministic.
// The 3x3/1x1 convolutions are lowered to a GEMM over an im2col buffer.

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

namespace detail {

// B(r, oy*W+ox) = x(c, oy+kh-pad, ox+kw-pad), rows r = (c*K+kh)*K+kw.
template <typename T>
void im2col(const T* x_plane, std::int64_t cin, std::int64_t h, std::int64_t w, int k, int pad,
            T* cols) {
  const std::int64_t hw = h * w;
  std::memset(cols, 0, static_cast<size_t>(cin) * k * k * hw * sizeof(T));
  for (std::int64_t c = 0; c < cin; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        T* dst_row = cols + ((c * k + kh) * k + kw) * hw;
        const int shift = kw - pad;
        const std::int64_t lo = std::max<std::int64_t>(0, -shift);
        const std::int64_t hi = std::min<std::int64_t>(w, w - shift);
        if (lo >= hi) continue;
        for (std::int64_t oy = 0; oy < h; ++oy) {
          const std::int64_t iy = oy + kh - pad;
          if (iy < 0 || iy >= h) continue;
          const T* src = x_plane + (c * h + iy) * w + (lo + shift);
          std::memcpy(dst_row + oy * w + lo, src, static_cast<size_t>(hi - lo) * sizeof(T));
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add column gradients back onto the input plane.
template <typename T>
void col2im(const T* cols, std::int64_t cin, std::int64_t h, std::int64_t w, int k, int pad,
            T* dx_plane) {
  const std::int64_t hw = h * w;
  for (std::int64_t c = 0; c < cin; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const T* src_row = cols + ((c * k + kh) * k + kw) * hw;
        const int shift = kw - pad;
        const std::int64_t lo = std::max<std::int64_t>(0, -shift);
        const std::int64_t hi = std::min<std::int64_t>(w, w - shift);
        if (lo >= hi) continue;
        for (std::int64_t oy = 0; oy < h; ++oy) {
          const std::int64_t iy = oy + kh - pad;
          if (iy < 0 || iy >= h) continue;
          T* dst = dx_plane + (c * h + iy) * w + (lo + shift);
          const T* src = src_row + oy * w + lo;
          for (std::int64_t t = 0; t < hi - lo; ++t) dst[t] += src[t];
        }
      }
    }
  }
}

inline void check_conv_args(const std::vector<std::int64_t>& xs,
                            const std::vector<std::int64_t>& ws, int padding) {
  if (xs.size() != 4 || ws.size() != 4) throw ShapeError("conv2d: expected 4-d tensors");
  const auto k = ws[2];
  if (ws[3] != k || (k != 1 && k != 3)) throw ShapeError("conv2d: kernel must be 1x1 or 3x3");
  if (padding != (k - 1) / 2) {
    throw ShapeError("conv2d: padding must be " + std::to_string((k - 1) / 2) + " for " +
                     std::to_string(k) + "x" + std::to_string(k) + " kernels");
  }
  if (xs[1] != ws[1]) {
    throw ShapeError("conv2d: input has " + std::to_string(xs[1]) + " channels, kernel expects " +
                     std::to_string(ws[1]));
  }
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int padding) {
  detail::check_conv_args(x.shape(), w.shape(), padding);
  const std::int64_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wid = x.dim(3);
  const std::int64_t cout = w.dim(0);
  const int k = static_cast<int>(w.dim(2));
  require_shape(b, {cout}, "conv2d bias");

  Tensor<T> y({n, cout, h, wid});
  const std::int64_t hw = h * wid;
  const std::int64_t ckk = cin * k * k;
  ConstMatMap<T> wmat(w.data(), cout, ckk);

  std::vector<T> cols;
  if (k != 1) cols.resize(static_cast<size_t>(ckk * hw));
  for (std::int64_t s = 0; s < n; ++s) {
    const T* x_plane = x.data() + s * cin * hw;
    if (k != 1) detail::im2col(x_plane, cin, h, wid, k, padding, cols.data());
    ConstMatMap<T> bmat(k == 1 ? x_plane : cols.data(), ckk, hw);
    MatMap<T> ymat(y.data() + s * cout * hw, cout, hw);
    ymat.noalias() = wmat * bmat;
    for (std::int64_t c = 0; c < cout; ++c) ymat.row(c).array() += b[c];
  }
  return y;
}

template <typename T>
struct Conv2dGrad {
  Tensor<T> dx, dw, db;
};

template <typename T>
Conv2dGrad<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, int padding,
                              const Tensor<T>& dy) {
  detail::check_conv_args(x.shape(), w.shape(), padding);
  const std::int64_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wid = x.dim(3);
  const std::int64_t cout = w.dim(0);
  const int k = static_cast<int>(w.dim(2));
  require_shape(dy, {n, cout, h, wid}, "conv2d_backward dy");

  Conv2dGrad<T> g{Tensor<T>(x.shape()), Tensor<T>(w.shape()), Tensor<T>({cout})};
  const std::int64_t hw = h * wid;
  const std::int64_t ckk = cin * k * k;
  ConstMatMap<T> wmat(w.data(), cout, ckk);
  MatMap<T> dwmat(g.dw.data(), cout, ckk);

  std::vector<T> cols;
  std::vector<T> dcols(static_cast<size_t>(ckk * hw));
  if (k != 1) cols.resize(static_cast<size_t>(ckk * hw));
  for (std::int64_t s = 0; s < n; ++s) {
    const T* x_plane = x.data() + s * cin * hw;
    const T* dy_plane = dy.data() + s * cout * hw;
    ConstMatMap<T> dymat(dy_plane, cout, hw);

    if (k != 1) detail::im2col(x_plane, cin, h, wid, k, padding, cols.data());
    ConstMatMap<T> bmat(k == 1 ? x_plane : cols.data(), ckk, hw);
    dwmat.noalias() += dymat * bmat.transpose();
    for (std::int64_t c = 0; c < cout; ++c) g.db[c] += dymat.row(c).sum();

    MatMap<T> dcmat(dcols.data(), ckk, hw);
    dcmat.noalias() = wmat.transpose() * dymat;
    T* dx_plane = g.dx.data() + s * cin * hw;
    if (k == 1) {
      for (std::int64_t t = 0; t < ckk * hw; ++t) dx_plane[t] += dcols[static_cast<size_t>(t)];
    } else {
      detail::col2im(dcols.data(), cin, h, wid, k, padding, dx_plane);
    }
  }
  return g;
}

// ---- batch normalization ---------------------------------------------------

template <typename T>
struct BatchNormForward {
  Tensor<T> y;
  Tensor<T> saved_mean, saved_invstd;          // train-mode batch statistics
  Tensor<T> new_running_mean, new_running_var;  // post-update running stats
};

template <typename T>
BatchNormForward<T> batchnorm2d_forward(const Tensor<T>& x, const Tensor<T>& gamma,
                                        const Tensor<T>& beta, const Tensor<T>& running_mean,
                                        const Tensor<T>& running_var, bool train,
                                        double momentum = 0.1, double eps = 1e-5) {
  if (x.rank() != 4) throw ShapeError("batchnorm2d: expected 4-d input");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  require_shape(gamma, {c}, "batchnorm2d gamma");
  require_shape(beta, {c}, "batchnorm2d beta");
  require_shape(running_mean, {c}, "batchnorm2d running_mean");
  require_shape(running_var, {c}, "batchnorm2d running_var");
  if (train && n < 2) throw StateError("batchnorm2d: train mode needs batch size >= 2");

  BatchNormForward<T> out{Tensor<T>(x.shape()), Tensor<T>({c}), Tensor<T>({c}), running_mean,
                          running_var};
  const std::int64_t plane = h * w;
  const std::int64_t m = n * plane;

  for (std::int64_t ch = 0; ch < c; ++ch) {
    double mean, invstd;
    if (train) {
      double sum = 0.0;
      for (std::int64_t s = 0; s < n; ++s) {
        const T* p = x.data() + (s * c + ch) * plane;
        for (std::int64_t t = 0; t < plane; ++t) sum += p[t];
      }
      mean = sum / static_cast<double>(m);
      double ssq = 0.0;
      for (std::int64_t s = 0; s < n; ++s) {
        const T* p = x.data() + (s * c + ch) * plane;
        for (std::int64_t t = 0; t < plane; ++t) {
          const double d = p[t] - mean;
          ssq += d * d;
        }
      }
      const double var = ssq / static_cast<double>(m);  // biased, for normalization
      invstd = 1.0 / std::sqrt(var + eps);
      out.saved_mean[ch] = static_cast<T>(mean);
      out.saved_invstd[ch] = static_cast<T>(invstd);
      const double unbiased = m > 1 ? ssq / static_cast<double>(m - 1) : var;
      out.new_running_mean[ch] =
          static_cast<T>((1.0 - momentum) * running_mean[ch] + momentum * mean);
      out.new_running_var[ch] =
          static_cast<T>((1.0 - momentum) * running_var[ch] + momentum * unbiased);
    } else {
      mean = running_mean[ch];
      invstd = 1.0 / std::sqrt(static_cast<double>(running_var[ch]) + eps);
    }
    const double g = gamma[ch], b = beta[ch];
    for (std::int64_t s = 0; s < n; ++s) {
      const T* p = x.data() + (s * c + ch) * plane;
      T* q = out.y.data() + (s * c + ch) * plane;
      for (std::int64_t t = 0; t < plane; ++t) {
        q[t] = static_cast<T>((p[t] - mean) * invstd * g + b);
      }
    }
  }
  return out;
}

template <typename T>
struct BatchNormGrad {
  Tensor<T> dx, dgamma, dbeta;
};

// Train-mode backward, differentiating through the batch statistics.
template <typename T>
BatchNormGrad<T> batchnorm2d_backward(const Tensor<T>& x, const Tensor<T>& gamma,
                                      const Tensor<T>& saved_mean, const Tensor<T>& saved_invstd,
                                      const Tensor<T>& dy) {
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  require_shape(dy, x.shape(), "batchnorm2d_backward dy");
  BatchNormGrad<T> g{Tensor<T>(x.shape()), Tensor<T>({c}), Tensor<T>({c})};
  const std::int64_t plane = h * w;
  const double m = static_cast<double>(n * plane);

  for (std::int64_t ch = 0; ch < c; ++ch) {
    const double mean = saved_mean[ch], invstd = saved_invstd[ch];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::int64_t s = 0; s < n; ++s) {
      const T* px = x.data() + (s * c + ch) * plane;
      const T* pdy = dy.data() + (s * c + ch) * plane;
      for (std::int64_t t = 0; t < plane; ++t) {
        const double xhat = (px[t] - mean) * invstd;
        sum_dy += pdy[t];
        sum_dy_xhat += pdy[t] * xhat;
      }
    }
    g.dbeta[ch] = static_cast<T>(sum_dy);
    g.dgamma[ch] = static_cast<T>(sum_dy_xhat);
    const double scale = static_cast<double>(gamma[ch]) * invstd;
    for (std::int64_t s = 0; s < n; ++s) {
      const T* px = x.data() + (s * c + ch) * plane;
      const T* pdy = dy.data() + (s * c + ch) * plane;
      T* pdx = g.dx.data() + (s * c + ch) * plane;
      for (std::int64_t t = 0; t < plane; ++t) {
        const double xhat = (px[t] - mean) * invstd;
        pdx[t] = static_cast<T>(scale * (pdy[t] - sum_dy / m - xhat * sum_dy_xhat / m));
      }
    }
  }
  return g;
}

// ---- activations -----------------------------------------------------------

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
  require_shape(dy, x.shape(), "relu_backward dy");
  Tensor<T> dx(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) dx[i] = x[i] > T{0} ? dy[i] : T{0};
  return dx;
}

template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const double v = x[i];
    if (v >= 0.0) {
      y[i] = static_cast<T>(1.0 / (1.0 + std::exp(-v)));
    } else {
      const double e = std::exp(v);
      y[i] = static_cast<T>(e / (1.0 + e));
    }
  }
  return y;
}

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  require_shape(dy, y.shape(), "sigmoid_backward dy");
  Tensor<T> dx(y.shape());
  for (std::int64_t i = 0; i < y.numel(); ++i) dx[i] = dy[i] * y[i] * (T{1} - y[i]);
  return dx;
}

// ---- pooling and resampling ------------------------------------------------

template <typename T>
struct MaxPoolForward {
  Tensor<T> y;
  Tensor<std::int64_t> argmax;  // flat input offsets; ties pick the first in row-major order
};

template <typename T>
MaxPoolForward<T> maxpool2_forward(const Tensor<T>& x) {
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 != 0 || w % 2 != 0) {
    throw ShapeError("maxpool2: spatial dims must be even, got " + std::to_string(h) + "x" +
                     std::to_string(w));
  }
  MaxPoolForward<T> out{Tensor<T>({n, c, h / 2, w / 2}), Tensor<std::int64_t>({n, c, h / 2, w / 2})};
  std::int64_t o = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const std::int64_t base = (s * c + ch) * h * w;
      for (std::int64_t i = 0; i < h; i += 2) {
        for (std::int64_t j = 0; j < w; j += 2, ++o) {
          std::int64_t best = base + i * w + j;
          T bv = x[best];
          const std::int64_t cand[3] = {base + i * w + j + 1, base + (i + 1) * w + j,
                                        base + (i + 1) * w + j + 1};
          for (std::int64_t idx : cand) {
            if (x[idx] > bv) {
              bv = x[idx];
              best = idx;
            }
          }
          out.y[o] = bv;
          out.argmax[o] = best;
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> maxpool2_backward(const Tensor<std::int64_t>& argmax, const Tensor<T>& dy,
                            const std::vector<std::int64_t>& input_shape) {
  require_shape(dy, argmax.shape(), "maxpool2_backward dy");
  Tensor<T> dx(input_shape);
  for (std::int64_t i = 0; i < dy.numel(); ++i) dx[argmax[i]] += dy[i];
  return dx;
}

namespace detail {

// Corner-aligned source coordinate (degenerate output dim samples index 0).
inline double align_coord(std::int64_t out_idx, std::int64_t in_size, std::int64_t out_size) {
  if (out_size == 1) return 0.0;
  return static_cast<double>(out_idx) * static_cast<double>(in_size - 1) /
         static_cast<double>(out_size - 1);
}

}  // namespace detail

template <typename T>
Tensor<T> upsample_bilinear_forward(const Tensor<T>& x, std::int64_t out_h, std::int64_t out_w) {
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (out_h < 1 || out_w < 1) throw ShapeError("upsample_bilinear: output dims must be >= 1");
  Tensor<T> y({n, c, out_h, out_w});
  for (std::int64_t oy = 0; oy < out_h; ++oy) {
    const double sy = detail::align_coord(oy, h, out_h);
    const std::int64_t y0 = static_cast<std::int64_t>(sy);
    const std::int64_t y1 = std::min(y0 + 1, h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::int64_t ox = 0; ox < out_w; ++ox) {
      const double sx = detail::align_coord(ox, w, out_w);
      const std::int64_t x0 = static_cast<std::int64_t>(sx);
      const std::int64_t x1 = std::min(x0 + 1, w - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::int64_t s = 0; s < n; ++s) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
          const T* p = x.data() + (s * c + ch) * h * w;
          const double v = (1.0 - fy) * ((1.0 - fx) * p[y0 * w + x0] + fx * p[y0 * w + x1]) +
                           fy * ((1.0 - fx) * p[y1 * w + x0] + fx * p[y1 * w + x1]);
          y.at4(s, ch, oy, ox) = static_cast<T>(v);
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> upsample_bilinear_backward(const Tensor<T>& dy, std::int64_t in_h, std::int64_t in_w) {
  const std::int64_t n = dy.dim(0), c = dy.dim(1), out_h = dy.dim(2), out_w = dy.dim(3);
  Tensor<T> dx({n, c, in_h, in_w});
  for (std::int64_t oy = 0; oy < out_h; ++oy) {
    const double sy = detail::align_coord(oy, in_h, out_h);
    const std::int64_t y0 = static_cast<std::int64_t>(sy);
    const std::int64_t y1 = std::min(y0 + 1, in_h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::int64_t ox = 0; ox < out_w; ++ox) {
      const double sx = detail::align_coord(ox, in_w, out_w);
      const std::int64_t x0 = static_cast<std::int64_t>(sx);
      const std::int64_t x1 = std::min(x0 + 1, in_w - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::int64_t s = 0; s < n; ++s) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
          T* p = dx.data() + (s * c + ch) * in_h * in_w;
          const double g = dy.at4(s, ch, oy, ox);
          p[y0 * in_w + x0] += static_cast<T>((1.0 - fy) * (1.0 - fx) * g);
          p[y0 * in_w + x1] += static_cast<T>((1.0 - fy) * fx * g);
          p[y1 * in_w + x0] += static_cast<T>(fy * (1.0 - fx) * g);
          p[y1 * in_w + x1] += static_cast<T>(fy * fx * g);
        }
      }
    }
  }
  return dx;
}

// Disjoint near-equal bins with edges floor(i * size / out).
inline std::int64_t pool_edge(std::int64_t idx, std::int64_t in_size, std::int64_t out_size) {
  return idx * in_size / out_size;
}

template <typename T>
Tensor<T> adaptive_avgpool_forward(const Tensor<T>& x, std::int64_t out_h, std::int64_t out_w) {
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (out_h < 1 || out_w < 1 || out_h > h || out_w > w) {
    throw ShapeError("adaptive_avgpool: output dims must be in [1, input dims]");
  }
  Tensor<T> y({n, c, out_h, out_w});
  for (std::int64_t oy = 0; oy < out_h; ++oy) {
    const std::int64_t i0 = pool_edge(oy, h, out_h), i1 = pool_edge(oy + 1, h, out_h);
    for (std::int64_t ox = 0; ox < out_w; ++ox) {
      const std::int64_t j0 = pool_edge(ox, w, out_w), j1 = pool_edge(ox + 1, w, out_w);
      const double inv = 1.0 / static_cast<double>((i1 - i0) * (j1 - j0));
      for (std::int64_t s = 0; s < n; ++s) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
          const T* p = x.data() + (s * c + ch) * h * w;
          double acc = 0.0;
          for (std::int64_t i = i0; i < i1; ++i)
            for (std::int64_t j = j0; j < j1; ++j) acc += p[i * w + j];
          y.at4(s, ch, oy, ox) = static_cast<T>(acc * inv);
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> adaptive_avgpool_backward(const Tensor<T>& dy, std::int64_t in_h, std::int64_t in_w) {
  const std::int64_t n = dy.dim(0), c = dy.dim(1), out_h = dy.dim(2), out_w = dy.dim(3);
  Tensor<T> dx({n, c, in_h, in_w});
  for (std::int64_t oy = 0; oy < out_h; ++oy) {
    const std::int64_t i0 = pool_edge(oy, in_h, out_h), i1 = pool_edge(oy + 1, in_h, out_h);
    for (std::int64_t ox = 0; ox < out_w; ++ox) {
      const std::int64_t j0 = pool_edge(ox, in_w, out_w), j1 = pool_edge(ox + 1, in_w, out_w);
      const double inv = 1.0 / static_cast<double>((i1 - i0) * (j1 - j0));
      for (std::int64_t s = 0; s < n; ++s) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
          T* p = dx.data() + (s * c + ch) * in_h * in_w;
          const double g = dy.at4(s, ch, oy, ox) * inv;
          for (std::int64_t i = i0; i < i1; ++i)
            for (std::int64_t j = j0; j < j1; ++j) p[i * in_w + j] += static_cast<T>(g);
        }
      }
    }
  }
  return dx;
}

// ---- structure ops ----------------------------------------------------------

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 4 || b.rank() != 4 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) ||
      a.dim(3) != b.dim(3)) {
    throw ShapeError("concat_channels: non-channel dims must agree");
  }
  const std::int64_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), h = a.dim(2), w = a.dim(3);
  Tensor<T> y({n, ca + cb, h, w});
  const std::int64_t plane = h * w;
  for (std::int64_t s = 0; s < n; ++s) {
    std::memcpy(y.data() + s * (ca + cb) * plane, a.data() + s * ca * plane,
                static_cast<size_t>(ca * plane) * sizeof(T));
    std::memcpy(y.data() + (s * (ca + cb) + ca) * plane, b.data() + s * cb * plane,
                static_cast<size_t>(cb * plane) * sizeof(T));
  }
  return y;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& y, std::int64_t ca) {
  const std::int64_t n = y.dim(0), c = y.dim(1), h = y.dim(2), w = y.dim(3);
  if (ca < 1 || ca >= c) throw ShapeError("split_channels: split point out of range");
  const std::int64_t cb = c - ca;
  std::pair<Tensor<T>, Tensor<T>> out{Tensor<T>({n, ca, h, w}), Tensor<T>({n, cb, h, w})};
  const std::int64_t plane = h * w;
  for (std::int64_t s = 0; s < n; ++s) {
    std::memcpy(out.first.data() + s * ca * plane, y.data() + s * c * plane,
                static_cast<size_t>(ca * plane) * sizeof(T));
    std::memcpy(out.second.data() + s * cb * plane, y.data() + (s * c + ca) * plane,
                static_cast<size_t>(cb * plane) * sizeof(T));
  }
  return out;
}

// ---- dropout ----------------------------------------------------------------

template <typename T>
struct DropoutForward {
  Tensor<T> y;
  Tensor<T> mask;  // 0 for dropped elements, 1/(1-p) for survivors
};

template <typename T>
DropoutForward<T> dropout_forward(const Tensor<T>& x, double p, std::uint64_t seed, bool train) {
  if (p < 0.0 || p >= 1.0) throw InvalidArgument("dropout: p must be in [0,1)");
  DropoutForward<T> out{Tensor<T>(x.shape()), Tensor<T>(x.shape())};
  if (!train || p == 0.0) {
    out.y = x;
    for (std::int64_t i = 0; i < x.numel(); ++i) out.mask[i] = T{1};
    return out;
  }
  Rng rng(seed);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const T m = rng.bernoulli(p) ? T{0} : scale;
    out.mask[i] = m;
    out.y[i] = x[i] * m;
  }
  return out;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& dy) {
  require_shape(dy, mask.shape(), "dropout_backward dy");
  Tensor<T> dx(mask.shape());
  for (std::int64_t i = 0; i < dy.numel(); ++i) dx[i] = dy[i] * mask[i];
  return dx;
}

}  // namespace wsseg
