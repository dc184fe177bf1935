#pragma once

#include <functional>
#include <vector>

#include "ops.hpp"

namespace vqssm {

// Max over coordinates of |autodiff - central difference| / max(1, |central difference|).
// f must produce a scalar var from the leaf handed to it.
double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double step = 1e-6);

// Same check for persistent parameters.
//   loss_with_grads: zero grads, forward+backward, return loss (fills Param::grad)
//   loss_value:      forward only, return loss
double grad_check_params(const std::function<double()>& loss_with_grads,
                         const std::function<double()>& loss_value,
                         const std::vector<Param*>& params, double step = 1e-6);

}  // namespace vqssm
