#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "common.hpp"

namespace vqssm {

using Shape = std::vector<int64_t>;

// Dense row-major tensor of doubles. Rank 1 or 2 covers everything here;
// a scalar is shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double v);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor randn(Shape shape, Rng& rng, double stddev = 1.0);
  static Tensor uniform(Shape shape, Rng& rng, double lo, double hi);
  static Tensor identity(int64_t n);

  const Shape& shape() const { return shape_; }
  int64_t ndim() const { return static_cast<int64_t>(shape_.size()); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  int64_t rows() const;
  int64_t cols() const;
  bool is_scalar() const { return size() == 1; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * cols() + c)]; }
  double at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * cols() + c)]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;
  void fill(double v);
  void round_to_precision();

  uint64_t content_hash() const {
    return data_.empty() ? fnv1a64(nullptr, 0) : fnv1a64(data_.data(), data_.size() * sizeof(double));
  }

  std::string shape_str() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

int64_t shape_numel(const Shape& s);

}  // namespace vqssm
