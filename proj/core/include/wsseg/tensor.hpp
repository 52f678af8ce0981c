#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "wsseg/errors.hpp"

namespace wsseg {

// Dense row-major tensor. Training uses float; gradient verification
// instantiates the same code at double.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape)
      : shape_(std::move(shape)), data_(checked_numel(shape_)) {}
  Tensor(std::vector<std::int64_t> shape, T fill)
      : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

  const std::vector<std::int64_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  std::int64_t dim(size_t i) const { return shape_.at(i); }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](std::int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // NCHW convenience.
  T& at4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[static_cast<size_t>(((n * dim(1) + c) * dim(2) + h) * dim(3) + w)];
  }
  const T& at4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[static_cast<size_t>(((n * dim(1) + c) * dim(2) + h) * dim(3) + w)];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

  static std::string shape_str(const std::vector<std::int64_t>& s) {
    std::string out = "(";
    for (size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + ")";
  }

 private:
  static size_t checked_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (auto d : shape) {
      if (d <= 0) throw ShapeError("tensor dimension must be positive in " + shape_str(shape));
      n *= d;
    }
    return static_cast<size_t>(n);
  }

  std::vector<std::int64_t> shape_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename T>
void require_shape(const Tensor<T>& t, const std::vector<std::int64_t>& shape, const char* what) {
  if (t.shape() != shape) {
    throw ShapeError(std::string(what) + ": expected " + Tensor<T>::shape_str(shape) + ", got " +
                     Tensor<T>::shape_str(t.shape()));
  }
}

}  // namespace wsseg
