#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ops.hpp"

namespace vqssm {

// Parameter registry. Modules create named, group-tagged params here; the
// optimizer and the freeze contracts operate on groups.
class ParamStore {
 public:
  Param* create(const std::string& name, const std::string& group, Tensor init);
  Param* find(const std::string& name) const;
  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }
  std::vector<Param*> group(const std::string& g) const;
  void zero_grads();
  uint64_t group_hash(const std::string& g) const;  // over values, registration order
  uint64_t values_hash() const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

struct Linear {
  Param* w = nullptr;
  Param* b = nullptr;
  static Linear create(ParamStore& ps, const std::string& prefix, const std::string& group, int64_t d_in,
                       int64_t d_out, Rng& rng);
  Var forward(Tape& t, Var x) const;
  int64_t d_in() const { return w->value.rows(); }
  int64_t d_out() const { return w->value.cols(); }
};

struct SSDConfig {
  int64_t d_model = 128;
  int64_t n_heads = 4;
  int64_t d_state = 16;
  int64_t expand = 2;
  int64_t conv_width = 4;          // 0 turns the conv off
  bool diag_state_decay = false;   // per-state diagonal decay instead of scalar-per-head
  int64_t d_inner() const { return expand * d_model; }
  int64_t d_head() const { return d_inner() / n_heads; }
  void validate() const;
};

// Left-to-right selective scan from zero state, one decay scalar per head
// (or a per-state diagonal when diag_decay). Strictly causal.
//   xs: L×d_inner   dt: L×H (positive)   B, C: L×N   a_log: H or H·N   d_skip: H
Var selective_scan_recurrent(Tape& t, Var xs, Var dt, Var B, Var C, Var a_log, Var d_skip,
                             int64_t n_heads, int64_t d_state, bool diag_decay);

// Equivalence oracle: materializes the semiseparable mixing matrix
// M_ji = C_j^T (prod_{i<k<=j} abar_k) (dt_i B_i) per head and multiplies.
// Plain tensors, forward only, O(L^2); rejects L above the cap.
Tensor selective_scan_matrix(const Tensor& xs, const Tensor& dt, const Tensor& B, const Tensor& C,
                             const Tensor& a_log, const Tensor& d_skip, int64_t n_heads, int64_t d_state,
                             bool diag_decay, int64_t max_len = 64);

// Gated block: in projections -> causal depthwise conv -> SiLU -> selective
// scan -> SiLU gate from the parallel branch -> out projection. The residual
// is the caller's responsibility.
class Mamba2Block {
 public:
  Mamba2Block(ParamStore& ps, const SSDConfig& cfg, const std::string& prefix, const std::string& group,
              Rng& rng);
  Var forward(Tape& t, Var x) const;
  const SSDConfig& config() const { return cfg_; }
  std::vector<Param*> params() const;

 private:
  SSDConfig cfg_;
  Linear z_proj_, x_proj_, b_proj_, c_proj_, dt_proj_, out_proj_;
  Param* conv_kernel_ = nullptr;
  Param* conv_bias_ = nullptr;
  Param* a_log_ = nullptr;
  Param* d_skip_ = nullptr;
};

}  // namespace vqssm
