#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace vqssm {

// A named persistent parameter. Gradients accumulate here after Tape::backward.
struct Param {
  std::string name;
  std::string group;  // partition tag: "encoder", "cbmi", "lm_base", "lora", "head", ...
  Tensor value;
  Tensor grad;

  Param(std::string n, std::string g, Tensor v)
      : name(std::move(n)), group(std::move(g)), value(std::move(v)), grad(Tensor::zeros(value.shape())) {}

  void zero_grad() { grad.fill(0.0); }
};

struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Ops append nodes in topological order by construction;
// backward walks the node list once in reverse. Single-threaded per tape.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Var leaf(Tensor value, bool requires_grad = false);
  Var leaf_of(Param& p);  // binds: backward adds the leaf grad into p.grad
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  const Tensor& val(Var v) const { return node(v.id).value; }
  bool requires_grad(Var v) const { return node(v.id).requires_grad; }
  const Tensor& grad(Var v) const;

  // Runs reverse accumulation from a scalar loss, then flushes bound params.
  void backward(Var loss);

  bool grad_enabled() const { return grad_enabled_; }
  size_t num_nodes() const { return nodes_.size(); }

  // --- op plumbing ---
  using BackwardFn = std::function<void(Tape&, int32_t self)>;
  Var emit(const char* op_name, Tensor value, const std::vector<Var>& parents, BackwardFn bwd);
  Tensor& grad_buf(int32_t id);
  bool has_grad(int32_t id) const { return node(id).grad_alloc; }
  void accumulate(Var parent, const Tensor& g);
  double* accum_ptr(Var parent);  // raw accumulator, or nullptr if parent needs no grad

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool grad_alloc = false;
    bool requires_grad = false;
    BackwardFn bwd;
  };
  Node& node(int32_t id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& node(int32_t id) const { return nodes_[static_cast<size_t>(id)]; }

  std::deque<Node> nodes_;  // stable references: val()/grad() stay valid as ops append
  std::vector<std::pair<int32_t, Param*>> bound_;
  bool grad_enabled_;
};

}  // namespace vqssm
