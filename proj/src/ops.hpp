#pragma once

#include <vector>

#include "tape.hpp"

namespace vqssm {

// Elementwise. b may share a's shape, be a length-cols(a) vector broadcast
// across rows, or be a scalar; anything else is rejected.
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double c);
Var add_const(Tape& t, Var a, double c);

Var sigmoid(Tape& t, Var x);
Var silu(Tape& t, Var x);
Var softplus(Tape& t, Var x);
Var exp_op(Tape& t, Var x);

Var matmul(Tape& t, Var a, Var b);

Var concat_rows(Tape& t, Var a, Var b);
Var slice_rows(Tape& t, Var x, int64_t r0, int64_t r1);
// Output row i = x row idx[i]; backward scatter-adds (repeats accumulate).
Var gather_rows(Tape& t, Var x, std::vector<int64_t> idx);

Var layer_norm(Tape& t, Var x, Var gamma, Var beta);
// Depthwise causal conv over rows (time axis), left zero-padded width-1.
// kernel is (channels × width), bias length channels.
Var conv_causal_depthwise(Tape& t, Var x, Var kernel, Var bias);
Var softmax_rows(Tape& t, Var x);
Var dropout(Tape& t, Var x, double rate, Rng& rng);

Var sum(Tape& t, Var x);                 // -> scalar
Var mean_rows(Tape& t, Var x);           // L×d -> length-d vector

Var cross_entropy_logits(Tape& t, Var logits, int64_t target);   // -> scalar
Var l1_to_const(Tape& t, Var x, const Tensor& target);           // -> scalar sum of |diff|
// Generalized IoU between a predicted (cx,cy,w,h) box and a constant target
// box; returns the GIoU value in [-1, 1] as a scalar var.
Var giou_with_const(Tape& t, Var pred_box, const Tensor& target_box);

double giou_value(const double* a_cxcywh, const double* b_cxcywh);
double iou_value(const double* a_cxcywh, const double* b_cxcywh);

}  // namespace vqssm
