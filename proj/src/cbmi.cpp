#include "cbmi.hpp"

namespace vqssm {

Var gate_and_merge(Tape& t, Var s_forward, Var s_backward, Var f_v, GateKind gate) {
  if (!t.val(s_forward).same_shape(t.val(s_backward)) || !t.val(s_forward).same_shape(t.val(f_v)))
    throw ContractError("gate_and_merge: operands must share one shape");
  Var g = gate == GateKind::silu ? silu(t, f_v) : sigmoid(t, f_v);
  return add(t, mul(t, s_forward, g), mul(t, s_backward, g));
}

CBMI::CBMI(ParamStore& ps, const CBMIConfig& cfg, int64_t d_text_in, int64_t d_visual_in, ScanOrder order,
           const std::string& prefix, const std::string& group, Rng& rng)
    : cfg_(cfg), order_(std::move(order)) {
  if (cfg_.depth < 0) throw ContractError("CBMI: negative depth");
  cfg_.block.d_model = cfg_.d_model;
  l_t_ = Linear::create(ps, prefix + ".l_t", group, d_text_in, cfg_.d_model, rng);
  l_v_ = Linear::create(ps, prefix + ".l_v", group, d_visual_in, cfg_.d_model, rng);
  const size_t n_stacks = cfg_.share_direction_params ? 1 : order_.directions.size();
  for (size_t s = 0; s < n_stacks; ++s) {
    std::vector<Mamba2Block> stack;
    for (int64_t d = 0; d < cfg_.depth; ++d)
      stack.emplace_back(ps, cfg_.block, prefix + ".dir" + std::to_string(s) + ".blk" + std::to_string(d),
                         group, rng);
    stacks_.push_back(std::move(stack));
  }
  ln_gamma_ = ps.create(prefix + ".ln.gamma", group, Tensor::full({cfg_.d_model}, 1.0));
  ln_beta_ = ps.create(prefix + ".ln.beta", group, Tensor::zeros({cfg_.d_model}));
  out_ = Linear::create(ps, prefix + ".out", group, cfg_.d_model, cfg_.d_model, rng);
}

std::pair<Var, Var> CBMI::project_inputs(Tape& t, Var text_emb, Var visual_emb) const {
  const Tensor& tv = t.val(text_emb);
  const Tensor& vv = t.val(visual_emb);
  if (tv.rows() < 1 || vv.rows() < 1) throw ContractError("project_inputs: empty modality");
  if (tv.cols() != l_t_.d_in() || vv.cols() != l_v_.d_in())
    throw ContractError("project_inputs: embedding width mismatch");
  return {l_t_.forward(t, text_emb), l_v_.forward(t, visual_emb)};
}

Var CBMI::directional_pass(Tape& t, Var f_t, Var f_v, size_t direction) const {
  if (direction >= order_.directions.size()) throw ContractError("directional_pass: no such direction");
  const std::vector<int64_t>& perm = order_.directions[direction];
  const int64_t v_rows = t.val(f_v).rows();
  if (v_rows != static_cast<int64_t>(perm.size()))
    throw ContractError("directional_pass: visual length does not match scan order");
  const int64_t t_rows = t.val(f_t).rows();

  Var x = concat_rows(t, f_t, gather_rows(t, f_v, perm));
  const auto& stack = stacks_[cfg_.share_direction_params ? 0 : direction];
  for (const Mamba2Block& blk : stack) x = add(t, x, blk.forward(t, x));
  Var visual = slice_rows(t, x, t_rows, t_rows + v_rows);
  // Position j in the scanned block holds cell perm[j]; inverse restores grid order.
  std::vector<int64_t> inv(perm.size());
  for (size_t j = 0; j < perm.size(); ++j) inv[static_cast<size_t>(perm[j])] = static_cast<int64_t>(j);
  return gather_rows(t, visual, inv);
}

Var CBMI::output_proj(Tape& t, Var s) const {
  return out_.forward(t, layer_norm(t, s, t.leaf_of(*ln_gamma_), t.leaf_of(*ln_beta_)));
}

Var CBMI::forward(Tape& t, Var text_emb, Var visual_emb) const {
  auto [f_t, f_v] = project_inputs(t, text_emb, visual_emb);
  std::vector<Var> branches;
  branches.reserve(order_.directions.size());
  for (size_t d = 0; d < order_.directions.size(); ++d)
    branches.push_back(directional_pass(t, f_t, f_v, d));
  Var s;
  if (branches.size() == 2) {
    s = gate_and_merge(t, branches[0], branches[1], f_v, cfg_.gate);
  } else {
    Var acc = branches[0];
    for (size_t i = 1; i < branches.size(); ++i) acc = add(t, acc, branches[i]);
    Var g = cfg_.gate == GateKind::silu ? silu(t, f_v) : sigmoid(t, f_v);
    s = mul(t, acc, g);
  }
  return output_proj(t, s);
}

}  // namespace vqssm
