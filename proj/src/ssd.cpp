#include "ssd.hpp"

#include <cmath>

namespace vqssm {

Param* ParamStore::create(const std::string& name, const std::string& group, Tensor init) {
  if (find(name)) throw ContractError("duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Param>(name, group, std::move(init)));
  return params_.back().get();
}

Param* ParamStore::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

std::vector<Param*> ParamStore::group(const std::string& g) const {
  std::vector<Param*> out;
  for (const auto& p : params_)
    if (p->group == g) out.push_back(p.get());
  return out;
}

void ParamStore::zero_grads() {
  for (const auto& p : params_) p->zero_grad();
}

uint64_t ParamStore::group_hash(const std::string& g) const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params_)
    if (p->group == g) {
      h = fnv1a64(p->name.data(), p->name.size(), h);
      h = fnv1a64(p->value.data(), static_cast<size_t>(p->value.size()) * sizeof(double), h);
    }
  return h;
}

uint64_t ParamStore::values_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params_) {
    h = fnv1a64(p->name.data(), p->name.size(), h);
    h = fnv1a64(p->value.data(), static_cast<size_t>(p->value.size()) * sizeof(double), h);
  }
  return h;
}

Linear Linear::create(ParamStore& ps, const std::string& prefix, const std::string& group, int64_t d_in,
                      int64_t d_out, Rng& rng) {
  Linear l;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  l.w = ps.create(prefix + ".w", group, Tensor::uniform({d_in, d_out}, rng, -bound, bound));
  l.b = ps.create(prefix + ".b", group, Tensor::zeros({d_out}));
  return l;
}

Var Linear::forward(Tape& t, Var x) const {
  return add(t, matmul(t, x, t.leaf_of(*w)), t.leaf_of(*b));
}

void SSDConfig::validate() const {
  if (d_model < 1 || n_heads < 1 || d_state < 1 || expand < 1) throw ContractError("SSDConfig: bad dims");
  if (d_inner() % n_heads != 0) throw ContractError("SSDConfig: d_inner must divide by n_heads");
  if (conv_width < 0 || conv_width == 1) throw ContractError("SSDConfig: conv_width must be 0 or >= 2");
}

Var selective_scan_recurrent(Tape& t, Var xs, Var dt, Var B, Var C, Var a_log, Var d_skip,
                             int64_t n_heads, int64_t d_state, bool diag_decay) {
  const Tensor& xv = t.val(xs);
  const Tensor& dtv = t.val(dt);
  const Tensor& bv = t.val(B);
  const Tensor& cv = t.val(C);
  const Tensor& av = t.val(a_log);
  const Tensor& dv = t.val(d_skip);
  const int64_t L = xv.rows(), din = xv.cols();
  const int64_t H = n_heads, N = d_state, P = din / H;
  if (L < 1) throw ContractError("selective_scan: empty sequence");
  if (din % H != 0) throw DimensionError("selective_scan: d_inner not divisible by heads");
  if (dtv.rows() != L || dtv.cols() != H) throw DimensionError("selective_scan: dt shape");
  if (bv.rows() != L || bv.cols() != N || cv.rows() != L || cv.cols() != N)
    throw DimensionError("selective_scan: B/C shape");
  if (av.size() != (diag_decay ? H * N : H) || dv.size() != H)
    throw DimensionError("selective_scan: a_log/d_skip shape");

  const bool want_grad = t.grad_enabled() &&
                         (t.requires_grad(xs) || t.requires_grad(dt) || t.requires_grad(B) ||
                          t.requires_grad(C) || t.requires_grad(a_log) || t.requires_grad(d_skip));

  // Cached hidden states h_k for the adjoint pass: layout [k][h][n][p].
  std::shared_ptr<std::vector<double>> cache;
  if (want_grad) cache = std::make_shared<std::vector<double>>(static_cast<size_t>(L * H * N * P));

  Tensor y({L, din});
  std::vector<double> state(static_cast<size_t>(N * P));
  for (int64_t h = 0; h < H; ++h) {
    std::fill(state.begin(), state.end(), 0.0);
    for (int64_t k = 0; k < L; ++k) {
      const double dtk = dtv.at(k, h);
      const double* xk = xv.data() + k * din + h * P;
      const double* bk = bv.data() + k * N;
      const double* ck = cv.data() + k * N;
      for (int64_t n = 0; n < N; ++n) {
        const double a = -std::exp(diag_decay ? av[h * N + n] : av[h]);
        const double abar = std::exp(dtk * a);
        const double bx = dtk * bk[n];
        double* sn = state.data() + n * P;
        for (int64_t p = 0; p < P; ++p) sn[p] = abar * sn[p] + bx * xk[p];
      }
      if (want_grad)
        std::copy(state.begin(), state.end(),
                  cache->begin() + static_cast<size_t>((k * H + h) * N * P));
      double* yk = y.data() + k * din + h * P;
      for (int64_t p = 0; p < P; ++p) yk[p] = dv[h] * xk[p];
      for (int64_t n = 0; n < N; ++n) {
        const double c = ck[n];
        const double* sn = state.data() + n * P;
        for (int64_t p = 0; p < P; ++p) yk[p] += c * sn[p];
      }
    }
  }

  return t.emit("selective_scan", std::move(y), {xs, dt, B, C, a_log, d_skip},
                [xs, dt, B, C, a_log, d_skip, cache, L, din, H, N, P, diag_decay](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad_buf(self);
    const Tensor& xv2 = tp.val(xs);
    const Tensor& dtv2 = tp.val(dt);
    const Tensor& bv2 = tp.val(B);
    const Tensor& cv2 = tp.val(C);
    const Tensor& av2 = tp.val(a_log);
    const Tensor& dv2 = tp.val(d_skip);
    double* dxs = tp.accum_ptr(xs);
    double* ddt = tp.accum_ptr(dt);
    double* dB = tp.accum_ptr(B);
    double* dC = tp.accum_ptr(C);
    double* dalog = tp.accum_ptr(a_log);
    double* dD = tp.accum_ptr(d_skip);

    std::vector<double> adj(static_cast<size_t>(N * P));
    std::vector<double> da(static_cast<size_t>(N));
    for (int64_t h = 0; h < H; ++h) {
      std::fill(adj.begin(), adj.end(), 0.0);
      std::fill(da.begin(), da.end(), 0.0);
      for (int64_t k = L - 1; k >= 0; --k) {
        const double dtk = dtv2.at(k, h);
        const double* gk = g.data() + k * din + h * P;
        const double* xk = xv2.data() + k * din + h * P;
        const double* bk = bv2.data() + k * N;
        const double* ck = cv2.data() + k * N;
        const double* hk = cache->data() + static_cast<size_t>((k * H + h) * N * P);
        const double* hkm1 = k > 0 ? cache->data() + static_cast<size_t>(((k - 1) * H + h) * N * P) : nullptr;

        if (dD) {
          double s = 0.0;
          for (int64_t p = 0; p < P; ++p) s += gk[p] * xk[p];
          dD[h] += s;
        }
        if (dxs) {
          double* dxk = dxs + k * din + h * P;
          for (int64_t p = 0; p < P; ++p) dxk[p] += dv2[h] * gk[p];
        }
        double dt_grad = 0.0;
        for (int64_t n = 0; n < N; ++n) {
          const double* hn = hk + n * P;
          double* an = adj.data() + n * P;
          if (dC) {
            double s = 0.0;
            for (int64_t p = 0; p < P; ++p) s += hn[p] * gk[p];
            dC[k * N + n] += s;
          }
          const double c = ck[n];
          for (int64_t p = 0; p < P; ++p) an[p] += c * gk[p];

          const double a = -std::exp(diag_decay ? av2[h * N + n] : av2[h]);
          const double abar = std::exp(dtk * a);
          // decay factor gradient via h_{k-1}
          double dabar = 0.0;
          if (hkm1) {
            const double* hm = hkm1 + n * P;
            for (int64_t p = 0; p < P; ++p) dabar += an[p] * hm[p];
          }
          dt_grad += dabar * a * abar;
          da[static_cast<size_t>(n)] += dabar * dtk * abar;
          // input injection term dt_k B_k x_k
          double sx = 0.0;
          for (int64_t p = 0; p < P; ++p) sx += an[p] * xk[p];
          dt_grad += sx * bk[n];
          if (dB) dB[k * N + n] += dtk * sx;
          if (dxs) {
            double* dxk = dxs + k * din + h * P;
            const double f = dtk * bk[n];
            for (int64_t p = 0; p < P; ++p) dxk[p] += f * an[p];
          }
          // push adjoint to h_{k-1}
          for (int64_t p = 0; p < P; ++p) an[p] *= abar;
        }
        if (ddt) ddt[k * H + h] += dt_grad;
      }
      if (dalog) {
        if (diag_decay) {
          for (int64_t n = 0; n < N; ++n) {
            const double a = -std::exp(av2[h * N + n]);
            dalog[h * N + n] += da[static_cast<size_t>(n)] * a;
          }
        } else {
          const double a = -std::exp(av2[h]);
          double s = 0.0;
          for (int64_t n = 0; n < N; ++n) s += da[static_cast<size_t>(n)];
          dalog[h] += s * a;
        }
      }
    }
  });
}

Tensor selective_scan_matrix(const Tensor& xs, const Tensor& dt, const Tensor& B, const Tensor& C,
                             const Tensor& a_log, const Tensor& d_skip, int64_t n_heads, int64_t d_state,
                             bool diag_decay, int64_t max_len) {
  const int64_t L = xs.rows(), din = xs.cols();
  if (L > max_len) throw ContractError("selective_scan_matrix: sequence above oracle cap");
  const int64_t H = n_heads, N = d_state, P = din / H;
  Tensor y({L, din});
  // Per-head, per-state prefix log-decays Lambda[k][n] = sum_{j<=k} dt_j * a_n.
  std::vector<double> lam(static_cast<size_t>((L + 1) * N), 0.0);
  for (int64_t h = 0; h < H; ++h) {
    for (int64_t n = 0; n < N; ++n) {
      const double a = -std::exp(diag_decay ? a_log[h * N + n] : a_log[h]);
      for (int64_t k = 0; k < L; ++k)
        lam[static_cast<size_t>((k + 1) * N + n)] = lam[static_cast<size_t>(k * N + n)] + dt.at(k, h) * a;
    }
    for (int64_t j = 0; j < L; ++j) {
      double* yj = y.data() + j * din + h * P;
      for (int64_t p = 0; p < P; ++p) yj[p] += d_skip[h] * xs.at(j, h * P + p);
      for (int64_t i = 0; i <= j; ++i) {
        double m = 0.0;
        for (int64_t n = 0; n < N; ++n)
          m += C.at(j, n) *
               std::exp(lam[static_cast<size_t>((j + 1) * N + n)] - lam[static_cast<size_t>((i + 1) * N + n)]) *
               B.at(i, n);
        m *= dt.at(i, h);
        const double* xi = xs.data() + i * din + h * P;
        for (int64_t p = 0; p < P; ++p) yj[p] += m * xi[p];
      }
    }
  }
  if (!y.all_finite()) throw NumericError("selective_scan_matrix produced non-finite output");
  return y;
}

Mamba2Block::Mamba2Block(ParamStore& ps, const SSDConfig& cfg, const std::string& prefix,
                         const std::string& group, Rng& rng)
    : cfg_(cfg) {
  cfg_.validate();
  const int64_t di = cfg_.d_inner();
  z_proj_ = Linear::create(ps, prefix + ".in_proj_z", group, cfg_.d_model, di, rng);
  x_proj_ = Linear::create(ps, prefix + ".in_proj_x", group, cfg_.d_model, di, rng);
  if (cfg_.conv_width > 0) {
    const double cb = 1.0 / std::sqrt(static_cast<double>(cfg_.conv_width));
    conv_kernel_ = ps.create(prefix + ".conv.k", group, Tensor::uniform({di, cfg_.conv_width}, rng, -cb, cb));
    conv_bias_ = ps.create(prefix + ".conv.b", group, Tensor::zeros({di}));
  }
  b_proj_ = Linear::create(ps, prefix + ".b_proj", group, di, cfg_.d_state, rng);
  c_proj_ = Linear::create(ps, prefix + ".c_proj", group, di, cfg_.d_state, rng);
  dt_proj_ = Linear::create(ps, prefix + ".dt_proj", group, di, cfg_.n_heads, rng);
  // dt bias chosen so softplus(bias) lands in [0.01, 0.1]
  for (int64_t h = 0; h < cfg_.n_heads; ++h) {
    const double target = rng.uniform(0.01, 0.1);
    dt_proj_.b->value[h] = std::log(std::expm1(target));
  }
  const int64_t a_len = cfg_.diag_state_decay ? cfg_.n_heads * cfg_.d_state : cfg_.n_heads;
  Tensor a0({a_len});
  for (int64_t i = 0; i < a_len; ++i) a0[i] = std::log(rng.uniform(1.0, 16.0));
  a_log_ = ps.create(prefix + ".a_log", group, std::move(a0));
  d_skip_ = ps.create(prefix + ".d_skip", group, Tensor::full({cfg_.n_heads}, 1.0));
  out_proj_ = Linear::create(ps, prefix + ".out_proj", group, di, cfg_.d_model, rng);
}

Var Mamba2Block::forward(Tape& t, Var x) const {
  if (t.val(x).cols() != cfg_.d_model) throw DimensionError("mamba2_block: input width != d_model");
  Var xc = x_proj_.forward(t, x);
  if (cfg_.conv_width > 0)
    xc = conv_causal_depthwise(t, xc, t.leaf_of(*conv_kernel_), t.leaf_of(*conv_bias_));
  Var s = silu(t, xc);
  Var bk = b_proj_.forward(t, s);
  Var ck = c_proj_.forward(t, s);
  Var dt = softplus(t, dt_proj_.forward(t, s));
  Var y = selective_scan_recurrent(t, s, dt, bk, ck, t.leaf_of(*a_log_), t.leaf_of(*d_skip_),
                                   cfg_.n_heads, cfg_.d_state, cfg_.diag_state_decay);
  Var gate = silu(t, z_proj_.forward(t, x));
  return out_proj_.forward(t, mul(t, y, gate));
}

std::vector<Param*> Mamba2Block::params() const {
  std::vector<Param*> out = {z_proj_.w, z_proj_.b, x_proj_.w, x_proj_.b, b_proj_.w, b_proj_.b,
                             c_proj_.w, c_proj_.b, dt_proj_.w, dt_proj_.b, a_log_, d_skip_,
                             out_proj_.w, out_proj_.b};
  if (conv_kernel_) {
    out.push_back(conv_kernel_);
    out.push_back(conv_bias_);
  }
  return out;
}

}  // namespace vqssm
