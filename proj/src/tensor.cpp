#include "tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace vqssm {

namespace {
std::atomic<Precision> g_precision{Precision::f64};
}

Precision precision_mode() { return g_precision.load(std::memory_order_relaxed); }
void set_precision_mode(Precision p) { g_precision.store(p, std::memory_order_relaxed); }

std::string hash_to_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) {
    if (d < 0) throw DimensionError("negative dimension in shape");
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != static_cast<int64_t>(data_.size()))
    throw DimensionError("tensor data length does not match shape");
}

Tensor Tensor::full(Shape shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::randn(Shape shape, Rng& rng, double stddev) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal() * stddev;
  return t;
}

Tensor Tensor::uniform(Shape shape, Rng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Tensor Tensor::identity(int64_t n) {
  Tensor t({n, n});
  for (int64_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

int64_t Tensor::rows() const {
  if (ndim() == 2) return shape_[0];
  if (ndim() == 1) return 1;
  throw DimensionError("rows() on tensor of rank " + std::to_string(ndim()));
}

int64_t Tensor::cols() const {
  if (ndim() == 2) return shape_[1];
  if (ndim() == 1) return shape_[0];
  throw DimensionError("cols() on tensor of rank " + std::to_string(ndim()));
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

void Tensor::round_to_precision() {
  if (precision_mode() != Precision::f32) return;
  for (double& x : data_) x = static_cast<double>(static_cast<float>(x));
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ")";
  return os.str();
}

}  // namespace vqssm
