#include "ops.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"

namespace vqssm {

namespace {

enum class Bcast { same, row, scalar };

Bcast bcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) return Bcast::same;
  if (b.is_scalar()) return Bcast::scalar;
  if (a.ndim() == 2 && b.ndim() == 1 && b.size() == a.cols()) return Bcast::row;
  throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
}

double stable_softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

}  // namespace

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  const Bcast k = bcast_kind(av, bv, "add");
  Tensor out = av;
  const int64_t n = out.size(), c = av.ndim() == 2 ? av.cols() : av.size();
  if (k == Bcast::same)
    for (int64_t i = 0; i < n; ++i) out[i] += bv[i];
  else if (k == Bcast::scalar)
    for (int64_t i = 0; i < n; ++i) out[i] += bv[0];
  else
    for (int64_t i = 0; i < n; ++i) out[i] += bv[i % c];
  return t.emit("add", std::move(out), {a, b}, [a, b, k, c](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    tp.accumulate(a, g);
    if (double* db = tp.accum_ptr(b)) {
      if (k == Bcast::same)
        for (int64_t i = 0; i < g.size(); ++i) db[i] += g[i];
      else if (k == Bcast::scalar)
        for (int64_t i = 0; i < g.size(); ++i) db[0] += g[i];
      else
        for (int64_t i = 0; i < g.size(); ++i) db[i % c] += g[i];
    }
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  const Bcast k = bcast_kind(av, bv, "sub");
  Tensor out = av;
  const int64_t n = out.size(), c = av.ndim() == 2 ? av.cols() : av.size();
  if (k == Bcast::same)
    for (int64_t i = 0; i < n; ++i) out[i] -= bv[i];
  else if (k == Bcast::scalar)
    for (int64_t i = 0; i < n; ++i) out[i] -= bv[0];
  else
    for (int64_t i = 0; i < n; ++i) out[i] -= bv[i % c];
  return t.emit("sub", std::move(out), {a, b}, [a, b, k, c](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    tp.accumulate(a, g);
    if (double* db = tp.accum_ptr(b)) {
      if (k == Bcast::same)
        for (int64_t i = 0; i < g.size(); ++i) db[i] -= g[i];
      else if (k == Bcast::scalar)
        for (int64_t i = 0; i < g.size(); ++i) db[0] -= g[i];
      else
        for (int64_t i = 0; i < g.size(); ++i) db[i % c] -= g[i];
    }
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  const Bcast k = bcast_kind(av, bv, "mul");
  Tensor out = av;
  const int64_t n = out.size(), c = av.ndim() == 2 ? av.cols() : av.size();
  if (k == Bcast::same)
    for (int64_t i = 0; i < n; ++i) out[i] *= bv[i];
  else if (k == Bcast::scalar)
    for (int64_t i = 0; i < n; ++i) out[i] *= bv[0];
  else
    for (int64_t i = 0; i < n; ++i) out[i] *= bv[i % c];
  return t.emit("mul", std::move(out), {a, b}, [a, b, k, c](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    const Tensor& av2 = tp.val(a);
    const Tensor& bv2 = tp.val(b);
    if (double* da = tp.accum_ptr(a)) {
      if (k == Bcast::same)
        for (int64_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv2[i];
      else if (k == Bcast::scalar)
        for (int64_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv2[0];
      else
        for (int64_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv2[i % c];
    }
    if (double* db = tp.accum_ptr(b)) {
      if (k == Bcast::same)
        for (int64_t i = 0; i < g.size(); ++i) db[i] += g[i] * av2[i];
      else if (k == Bcast::scalar)
        for (int64_t i = 0; i < g.size(); ++i) db[0] += g[i] * av2[i];
      else
        for (int64_t i = 0; i < g.size(); ++i) db[i % c] += g[i] * av2[i];
    }
  });
}

Var scale(Tape& t, Var a, double cfac) {
  Tensor out = t.val(a);
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= cfac;
  return t.emit("scale", std::move(out), {a}, [a, cfac](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    if (double* da = tp.accum_ptr(a))
      for (int64_t i = 0; i < g.size(); ++i) da[i] += cfac * g[i];
  });
}

Var add_const(Tape& t, Var a, double cadd) {
  Tensor out = t.val(a);
  for (int64_t i = 0; i < out.size(); ++i) out[i] += cadd;
  return t.emit("add_const", std::move(out), {a},
                [a](Tape& tp, int32_t self) { tp.accumulate(a, tp.grad_buf(self)); });
}

Var sigmoid(Tape& t, Var x) {
  Tensor out = t.val(x);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  return t.emit("sigmoid", std::move(out), {x}, [x](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    const Tensor& y = tp.val(Var{self});
    if (double* dx = tp.accum_ptr(x))
      for (int64_t i = 0; i < g.size(); ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var silu(Tape& t, Var x) {
  const Tensor& xv = t.val(x);
  Tensor out(xv.shape());
  for (int64_t i = 0; i < out.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-xv[i]));
    out[i] = xv[i] * s;
  }
  return t.emit("silu", std::move(out), {x}, [x](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    const Tensor& xv2 = tp.val(x);
    if (double* dx = tp.accum_ptr(x))
      for (int64_t i = 0; i < g.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-xv2[i]));
        dx[i] += g[i] * (s + xv2[i] * s * (1.0 - s));
      }
  });
}

Var softplus(Tape& t, Var x) {
  const Tensor& xv = t.val(x);
  Tensor out(xv.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = stable_softplus(xv[i]);
  return t.emit("softplus", std::move(out), {x}, [x](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    const Tensor& xv2 = tp.val(x);
    if (double* dx = tp.accum_ptr(x))
      for (int64_t i = 0; i < g.size(); ++i) dx[i] += g[i] / (1.0 + std::exp(-xv2[i]));
  });
}

Var exp_op(Tape& t, Var x) {
  Tensor out = t.val(x);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  return t.emit("exp", std::move(out), {x}, [x](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    const Tensor& y = tp.val(Var{self});
    if (double* dx = tp.accum_ptr(x))
      for (int64_t i = 0; i < g.size(); ++i) dx[i] += g[i] * y[i];
  });
}

Var matmul(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  if (av.ndim() != 2 || bv.ndim() != 2 || av.cols() != bv.rows())
    throw DimensionError("matmul: incompatible shapes " + av.shape_str() + " x " + bv.shape_str());
  const int64_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out({m, n});
  kern::mm_nn<false>(av.data(), bv.data(), out.data(), m, k, n);
  return t.emit("matmul", std::move(out), {a, b}, [a, b, m, k, n](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    const Tensor& av2 = tp.val(a);
    const Tensor& bv2 = tp.val(b);
    if (double* da = tp.accum_ptr(a)) kern::mm_nt<true>(g.data(), bv2.data(), da, m, n, k);
    if (double* db = tp.accum_ptr(b)) kern::mm_tn<true>(av2.data(), g.data(), db, m, k, n);
  });
}

Var concat_rows(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  if (av.ndim() != 2 || bv.ndim() != 2 || av.cols() != bv.cols())
    throw DimensionError("concat_rows: column mismatch");
  const int64_t ra = av.rows(), rb = bv.rows(), c = av.cols();
  Tensor out({ra + rb, c});
  std::copy(av.data(), av.data() + ra * c, out.data());
  std::copy(bv.data(), bv.data() + rb * c, out.data() + ra * c);
  return t.emit("concat_rows", std::move(out), {a, b}, [a, b, ra, rb, c](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    if (double* da = tp.accum_ptr(a))
      for (int64_t i = 0; i < ra * c; ++i) da[i] += g[i];
    if (double* db = tp.accum_ptr(b))
      for (int64_t i = 0; i < rb * c; ++i) db[i] += g[ra * c + i];
  });
}

Var slice_rows(Tape& t, Var x, int64_t r0, int64_t r1) {
  const Tensor& xv = t.val(x);
  if (xv.ndim() != 2 || r0 < 0 || r1 > xv.rows() || r0 >= r1)
    throw DimensionError("slice_rows: bad range");
  const int64_t c = xv.cols();
  Tensor out({r1 - r0, c});
  std::copy(xv.data() + r0 * c, xv.data() + r1 * c, out.data());
  return t.emit("slice_rows", std::move(out), {x}, [x, r0, r1, c](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    if (double* dx = tp.accum_ptr(x))
      for (int64_t i = 0; i < (r1 - r0) * c; ++i) dx[r0 * c + i] += g[i];
  });
}

Var gather_rows(Tape& t, Var x, std::vector<int64_t> idx) {
  const Tensor& xv = t.val(x);
  if (xv.ndim() != 2) throw DimensionError("gather_rows: rank-2 input required");
  const int64_t c = xv.cols(), r = xv.rows();
  for (int64_t i : idx)
    if (i < 0 || i >= r) throw DimensionError("gather_rows: index out of range");
  Tensor out({static_cast<int64_t>(idx.size()), c});
  for (size_t i = 0; i < idx.size(); ++i)
    std::copy(xv.data() + idx[i] * c, xv.data() + (idx[i] + 1) * c, out.data() + static_cast<int64_t>(i) * c);
  return t.emit("gather_rows", std::move(out), {x},
                [x, idx = std::move(idx), c](Tape& tp, int32_t self) {
                  const Tensor& g = tp.grad_buf(self);
                  if (double* dx = tp.accum_ptr(x))
                    for (size_t i = 0; i < idx.size(); ++i) {
                      const double* gi = g.data() + static_cast<int64_t>(i) * c;
                      double* di = dx + idx[i] * c;
                      for (int64_t j = 0; j < c; ++j) di[j] += gi[j];
                    }
                });
}

Var layer_norm(Tape& t, Var x, Var gamma, Var beta) {
  const Tensor& xv = t.val(x);
  const Tensor& gv = t.val(gamma);
  const Tensor& bv = t.val(beta);
  const int64_t L = xv.rows(), d = xv.cols();
  if (gv.size() != d || bv.size() != d) throw DimensionError("layer_norm: affine size mismatch");
  constexpr double kEps = 1e-15;
  Tensor out(xv.shape());
  auto xhat = std::make_shared<Tensor>(xv.shape());
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(L));
  for (int64_t i = 0; i < L; ++i) {
    const double* xi = xv.data() + i * d;
    double mu = 0.0;
    for (int64_t j = 0; j < d; ++j) mu += xi[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t j = 0; j < d; ++j) var += (xi[j] - mu) * (xi[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + kEps);
    (*inv_std)[static_cast<size_t>(i)] = is;
    for (int64_t j = 0; j < d; ++j) {
      const double xh = (xi[j] - mu) * is;
      xhat->at(i, j) = xh;
      out.at(i, j) = gv[j] * xh + bv[j];
    }
  }
  return t.emit("layer_norm", std::move(out), {x, gamma, beta},
                [x, gamma, beta, xhat, inv_std, L, d](Tape& tp, int32_t self) {
                  const Tensor& g = tp.grad_buf(self);
                  const Tensor& gv2 = tp.val(gamma);
                  double* dgamma = tp.accum_ptr(gamma);
                  double* dbeta = tp.accum_ptr(beta);
                  double* dx = tp.accum_ptr(x);
                  for (int64_t i = 0; i < L; ++i) {
                    const double* gi = g.data() + i * d;
                    const double* xh = xhat->data() + i * d;
                    if (dgamma)
                      for (int64_t j = 0; j < d; ++j) dgamma[j] += gi[j] * xh[j];
                    if (dbeta)
                      for (int64_t j = 0; j < d; ++j) dbeta[j] += gi[j];
                    if (dx) {
                      double m1 = 0.0, m2 = 0.0;
                      for (int64_t j = 0; j < d; ++j) {
                        const double dxh = gi[j] * gv2[j];
                        m1 += dxh;
                        m2 += dxh * xh[j];
                      }
                      m1 /= static_cast<double>(d);
                      m2 /= static_cast<double>(d);
                      const double is = (*inv_std)[static_cast<size_t>(i)];
                      for (int64_t j = 0; j < d; ++j) {
                        const double dxh = gi[j] * gv2[j];
                        dx[i * d + j] += is * (dxh - m1 - xh[j] * m2);
                      }
                    }
                  }
                });
}

Var conv_causal_depthwise(Tape& t, Var x, Var kernel, Var bias) {
  const Tensor& xv = t.val(x);
  const Tensor& kv = t.val(kernel);
  const Tensor& bv = t.val(bias);
  const int64_t L = xv.rows(), d = xv.cols();
  if (kv.ndim() != 2 || kv.rows() != d || bv.size() != d)
    throw DimensionError("conv_causal_depthwise: kernel/bias shape mismatch");
  const int64_t w = kv.cols();
  Tensor out({L, d});
  for (int64_t i = 0; i < L; ++i)
    for (int64_t c = 0; c < d; ++c) {
      double s = bv[c];
      for (int64_t j = 0; j < w; ++j) {
        const int64_t src = i - (w - 1) + j;
        if (src >= 0) s += kv.at(c, j) * xv.at(src, c);
      }
      out.at(i, c) = s;
    }
  return t.emit("conv_causal_depthwise", std::move(out), {x, kernel, bias},
                [x, kernel, bias, L, d, w](Tape& tp, int32_t self) {
                  const Tensor& g = tp.grad_buf(self);
                  const Tensor& xv2 = tp.val(x);
                  const Tensor& kv2 = tp.val(kernel);
                  double* dx = tp.accum_ptr(x);
                  double* dk = tp.accum_ptr(kernel);
                  double* db = tp.accum_ptr(bias);
                  for (int64_t i = 0; i < L; ++i)
                    for (int64_t c = 0; c < d; ++c) {
                      const double gi = g.at(i, c);
                      if (db) db[c] += gi;
                      for (int64_t j = 0; j < w; ++j) {
                        const int64_t src = i - (w - 1) + j;
                        if (src < 0) continue;
                        if (dk) dk[c * w + j] += gi * xv2.at(src, c);
                        if (dx) dx[src * d + c] += gi * kv2.at(c, j);
                      }
                    }
                });
}

Var softmax_rows(Tape& t, Var x) {
  const Tensor& xv = t.val(x);
  const int64_t L = xv.rows(), d = xv.cols();
  Tensor out(xv.shape());
  for (int64_t i = 0; i < L; ++i) {
    const double* xi = xv.data() + i * d;
    double mx = xi[0];
    for (int64_t j = 1; j < d; ++j) mx = std::max(mx, xi[j]);
    double z = 0.0;
    for (int64_t j = 0; j < d; ++j) z += std::exp(xi[j] - mx);
    for (int64_t j = 0; j < d; ++j) out.at(i, j) = std::exp(xi[j] - mx) / z;
  }
  return t.emit("softmax_rows", std::move(out), {x}, [x, L, d](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    const Tensor& y = tp.val(Var{self});
    if (double* dx = tp.accum_ptr(x))
      for (int64_t i = 0; i < L; ++i) {
        double dot = 0.0;
        for (int64_t j = 0; j < d; ++j) dot += g.at(i, j) * y.at(i, j);
        for (int64_t j = 0; j < d; ++j) dx[i * d + j] += y.at(i, j) * (g.at(i, j) - dot);
      }
  });
}

Var dropout(Tape& t, Var x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout rate must be in [0,1)");
  const Tensor& xv = t.val(x);
  if (rate == 0.0) return x;
  auto mask = std::make_shared<std::vector<double>>(static_cast<size_t>(xv.size()));
  const double keep = 1.0 - rate;
  Tensor out(xv.shape());
  for (int64_t i = 0; i < xv.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
    (*mask)[static_cast<size_t>(i)] = m;
    out[i] = xv[i] * m;
  }
  return t.emit("dropout", std::move(out), {x}, [x, mask](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    if (double* dx = tp.accum_ptr(x))
      for (int64_t i = 0; i < g.size(); ++i) dx[i] += g[i] * (*mask)[static_cast<size_t>(i)];
  });
}

Var sum(Tape& t, Var x) {
  const Tensor& xv = t.val(x);
  double s = 0.0;
  for (int64_t i = 0; i < xv.size(); ++i) s += xv[i];
  return t.emit("sum", Tensor::scalar(s), {x}, [x](Tape& tp, int32_t self) {
    const double g0 = tp.grad_buf(self)[0];
    if (double* dx = tp.accum_ptr(x)) {
      const int64_t n = tp.val(x).size();
      for (int64_t i = 0; i < n; ++i) dx[i] += g0;
    }
  });
}

Var mean_rows(Tape& t, Var x) {
  const Tensor& xv = t.val(x);
  const int64_t L = xv.rows(), d = xv.cols();
  Tensor out({d});
  for (int64_t i = 0; i < L; ++i)
    for (int64_t j = 0; j < d; ++j) out[j] += xv.at(i, j);
  for (int64_t j = 0; j < d; ++j) out[j] /= static_cast<double>(L);
  return t.emit("mean_rows", std::move(out), {x}, [x, L, d](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    if (double* dx = tp.accum_ptr(x)) {
      const double inv = 1.0 / static_cast<double>(L);
      for (int64_t i = 0; i < L; ++i)
        for (int64_t j = 0; j < d; ++j) dx[i * d + j] += g[j] * inv;
    }
  });
}

Var cross_entropy_logits(Tape& t, Var logits, int64_t target) {
  const Tensor& lv = t.val(logits);
  const int64_t C = lv.size();
  if (target < 0 || target >= C) throw ContractError("cross_entropy: target out of range");
  double mx = lv[0];
  for (int64_t i = 1; i < C; ++i) mx = std::max(mx, lv[i]);
  double z = 0.0;
  for (int64_t i = 0; i < C; ++i) z += std::exp(lv[i] - mx);
  const double loss = std::log(z) + mx - lv[target];
  return t.emit("cross_entropy", Tensor::scalar(loss), {logits},
                [logits, target, mx, z](Tape& tp, int32_t self) {
                  const double g0 = tp.grad_buf(self)[0];
                  const Tensor& lv2 = tp.val(logits);
                  if (double* dl = tp.accum_ptr(logits))
                    for (int64_t i = 0; i < lv2.size(); ++i) {
                      const double p = std::exp(lv2[i] - mx) / z;
                      dl[i] += g0 * (p - (i == target ? 1.0 : 0.0));
                    }
                });
}

Var l1_to_const(Tape& t, Var x, const Tensor& target) {
  const Tensor& xv = t.val(x);
  if (xv.size() != target.size()) throw DimensionError("l1_to_const: size mismatch");
  double s = 0.0;
  for (int64_t i = 0; i < xv.size(); ++i) s += std::abs(xv[i] - target[i]);
  return t.emit("l1_to_const", Tensor::scalar(s), {x}, [x, target](Tape& tp, int32_t self) {
    const double g0 = tp.grad_buf(self)[0];
    const Tensor& xv2 = tp.val(x);
    if (double* dx = tp.accum_ptr(x))
      for (int64_t i = 0; i < xv2.size(); ++i) {
        const double d = xv2[i] - target[i];
        dx[i] += g0 * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
      }
  });
}

namespace {

struct BoxCorners {
  double x1, y1, x2, y2;
};

BoxCorners to_corners(const double* b) {
  return {b[0] - 0.5 * b[2], b[1] - 0.5 * b[3], b[0] + 0.5 * b[2], b[1] + 0.5 * b[3]};
}

// Shared forward for value and op paths; optionally writes d(giou)/d(pred cx,cy,w,h).
double giou_forward(const double* pred, const double* tgt, double* dpred) {
  const BoxCorners a = to_corners(pred), b = to_corners(tgt);
  const double iw_raw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih_raw = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double iw = std::max(iw_raw, 0.0), ih = std::max(ih_raw, 0.0);
  const double inter = iw * ih;
  const double area_a = pred[2] * pred[3], area_b = tgt[2] * tgt[3];
  const double uni = area_a + area_b - inter;
  const double hw = std::max(a.x2, b.x2) - std::min(a.x1, b.x1);
  const double hh = std::max(a.y2, b.y2) - std::min(a.y1, b.y1);
  const double hull = hw * hh;
  const double giou = inter / uni - (hull - uni) / hull;
  if (!dpred) return giou;

  // Reverse accumulation through the closed form above.
  double g_iou = 1.0;
  double g_uni = 1.0 / hull;
  double g_hull = -uni / (hull * hull);
  const double g_hw = g_hull * hh, g_hh = g_hull * hw;
  double g_inter = g_iou / uni;
  g_uni += -g_iou * inter / (uni * uni);
  const double g_area_a = g_uni;
  g_inter += -g_uni;
  const double g_iw = g_inter * ih, g_ih = g_inter * iw;
  const double g_iwraw = iw_raw > 0.0 ? g_iw : 0.0;
  const double g_ihraw = ih_raw > 0.0 ? g_ih : 0.0;

  double g_ax1 = 0.0, g_ax2 = 0.0, g_ay1 = 0.0, g_ay2 = 0.0;
  if (a.x2 <= b.x2) g_ax2 += g_iwraw;
  if (a.x1 >= b.x1) g_ax1 -= g_iwraw;
  if (a.y2 <= b.y2) g_ay2 += g_ihraw;
  if (a.y1 >= b.y1) g_ay1 -= g_ihraw;
  if (a.x2 >= b.x2) g_ax2 += g_hw;
  if (a.x1 <= b.x1) g_ax1 -= g_hw;
  if (a.y2 >= b.y2) g_ay2 += g_hh;
  if (a.y1 <= b.y1) g_ay1 -= g_hh;

  dpred[0] = g_ax1 + g_ax2;
  dpred[1] = g_ay1 + g_ay2;
  dpred[2] = 0.5 * (g_ax2 - g_ax1) + g_area_a * pred[3];
  dpred[3] = 0.5 * (g_ay2 - g_ay1) + g_area_a * pred[2];
  return giou;
}

}  // namespace

double giou_value(const double* a, const double* b) { return giou_forward(a, b, nullptr); }

double iou_value(const double* pa, const double* pb) {
  const BoxCorners a = to_corners(pa), b = to_corners(pb);
  const double iw = std::max(std::min(a.x2, b.x2) - std::max(a.x1, b.x1), 0.0);
  const double ih = std::max(std::min(a.y2, b.y2) - std::max(a.y1, b.y1), 0.0);
  const double inter = iw * ih;
  const double uni = pa[2] * pa[3] + pb[2] * pb[3] - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Var giou_with_const(Tape& t, Var pred_box, const Tensor& target_box) {
  const Tensor& pv = t.val(pred_box);
  if (pv.size() != 4 || target_box.size() != 4) throw DimensionError("giou: boxes must have 4 components");
  if (target_box[2] <= 0.0 || target_box[3] <= 0.0) throw ContractError("giou: degenerate target box");
  Tensor tgt = target_box;
  const double g = giou_forward(pv.data(), tgt.data(), nullptr);
  return t.emit("giou", Tensor::scalar(g), {pred_box}, [pred_box, tgt](Tape& tp, int32_t self) {
    const double g0 = tp.grad_buf(self)[0];
    const Tensor& pv2 = tp.val(pred_box);
    double dp[4];
    giou_forward(pv2.data(), tgt.data(), dp);
    if (double* dx = tp.accum_ptr(pred_box))
      for (int i = 0; i < 4; ++i) dx[i] += g0 * dp[i];
  });
}

}  // namespace vqssm
