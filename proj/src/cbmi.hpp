#pragma once

#include "scan_order.hpp"
#include "ssd.hpp"

namespace vqssm {

enum class GateKind { silu, sigmoid };

struct CBMIConfig {
  int64_t d_model = 128;
  int64_t depth = 2;  // blocks per direction; 0 is a degenerate test config
  GateKind gate = GateKind::silu;
  bool share_direction_params = false;
  SSDConfig block;  // d_model is overwritten to match
};

// Eq-form merge of the two directional branches: S_f·σ(F_v) + S_b·σ(F_v).
Var gate_and_merge(Tape& t, Var s_forward, Var s_backward, Var f_v, GateKind gate);

// Cross-modal bidirectional fusion: project both modalities, run one
// selective-scan stack per scan direction over [text ; permuted visual],
// keep the visual positions in grid order, gate by σ(F_v), normalize and
// project. The scan order decides the direction set: one for the plain 1D
// scan, forward+reverse for the bidirectional modes, four for the cross scan.
class CBMI {
 public:
  CBMI(ParamStore& ps, const CBMIConfig& cfg, int64_t d_text_in, int64_t d_visual_in, ScanOrder order,
       const std::string& prefix, const std::string& group, Rng& rng);

  std::pair<Var, Var> project_inputs(Tape& t, Var text_emb, Var visual_emb) const;
  // One directional pass: joint causal scan, visual rows un-permuted to grid order.
  Var directional_pass(Tape& t, Var f_t, Var f_v, size_t direction) const;
  Var output_proj(Tape& t, Var s) const;
  Var forward(Tape& t, Var text_emb, Var visual_emb) const;

  size_t num_directions() const { return order_.directions.size(); }
  const ScanOrder& order() const { return order_; }
  const CBMIConfig& config() const { return cfg_; }

 private:
  CBMIConfig cfg_;
  ScanOrder order_;
  Linear l_t_, l_v_;
  std::vector<std::vector<Mamba2Block>> stacks_;  // one stack per direction (or one shared)
  Param* ln_gamma_ = nullptr;
  Param* ln_beta_ = nullptr;
  Linear out_;
};

}  // namespace vqssm
