#include "tape.hpp"

namespace vqssm {

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::leaf_of(Param& p) {
  Var v = leaf(p.value, true);
  if (grad_enabled_) bound_.emplace_back(v.id, &p);
  return v;
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v.id);
  if (!n.grad_alloc) throw ContractError("grad requested before backward touched node");
  return n.grad;
}

Tensor& Tape::grad_buf(int32_t id) {
  Node& n = node(id);
  if (!n.grad_alloc) {
    n.grad = Tensor::zeros(n.value.shape());
    n.grad_alloc = true;
  }
  return n.grad;
}

void Tape::accumulate(Var parent, const Tensor& g) {
  Node& n = node(parent.id);
  if (!n.requires_grad) return;
  Tensor& buf = grad_buf(parent.id);
  if (!buf.same_shape(g)) throw DimensionError("gradient shape mismatch in accumulate");
  double* d = buf.data();
  const double* s = g.data();
  const int64_t m = g.size();
  for (int64_t i = 0; i < m; ++i) d[i] += s[i];
}

double* Tape::accum_ptr(Var parent) {
  Node& n = node(parent.id);
  if (!n.requires_grad) return nullptr;
  return grad_buf(parent.id).data();
}

Var Tape::emit(const char* op_name, Tensor value, const std::vector<Var>& parents, BackwardFn bwd) {
  if (precision_mode() == Precision::f64) {
    if (!value.all_finite()) throw NumericError(std::string("non-finite output of op ") + op_name);
  } else {
    value.round_to_precision();
  }
  Node n;
  n.value = std::move(value);
  bool need = false;
  if (grad_enabled_) {
    for (Var p : parents)
      if (p.valid() && node(p.id).requires_grad) need = true;
  }
  n.requires_grad = need;
  if (need) n.bwd = std::move(bwd);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

void Tape::backward(Var loss) {
  if (!loss.valid()) throw ContractError("backward on invalid var");
  if (!val(loss).is_scalar()) throw ContractError("backward requires a scalar loss");
  if (!grad_enabled_) throw ContractError("backward on a grad-disabled tape");
  grad_buf(loss.id).fill(1.0);
  for (int32_t id = loss.id; id >= 0; --id) {
    Node& n = node(id);
    if (n.requires_grad && n.grad_alloc && n.bwd) {
      if (precision_mode() == Precision::f32) n.grad.round_to_precision();
      n.bwd(*this, id);
    }
  }
  for (auto& [id, p] : bound_) {
    Node& n = node(id);
    if (!n.grad_alloc) continue;  // no path from loss to this param
    double* d = p->grad.data();
    const double* s = n.grad.data();
    for (int64_t i = 0; i < n.grad.size(); ++i) d[i] += s[i];
  }
}

}  // namespace vqssm
