#include "gradcheck.hpp"

#include <cmath>

namespace vqssm {

double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double step) {
  Tensor ad;
  {
    Tape t;
    Var vx = t.leaf(x, true);
    Var loss = f(t, vx);
    t.backward(loss);
    ad = t.grad(vx);
  }
  auto eval = [&](const Tensor& xin) {
    Tape t(false);
    Var vx = t.leaf(xin, false);
    return t.val(f(t, vx))[0];
  };
  double worst = 0.0;
  Tensor xp = x;
  for (int64_t i = 0; i < x.size(); ++i) {
    const double orig = xp[i];
    xp[i] = orig + step;
    const double lp = eval(xp);
    xp[i] = orig - step;
    const double lm = eval(xp);
    xp[i] = orig;
    const double fd = (lp - lm) / (2.0 * step);
    const double rel = std::abs(ad[i] - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

double grad_check_params(const std::function<double()>& loss_with_grads,
                         const std::function<double()>& loss_value,
                         const std::vector<Param*>& params, double step) {
  loss_with_grads();
  std::vector<Tensor> ad;
  ad.reserve(params.size());
  for (Param* p : params) ad.push_back(p->grad);

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param* p = params[pi];
    for (int64_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + step;
      const double lp = loss_value();
      p->value[i] = orig - step;
      const double lm = loss_value();
      p->value[i] = orig;
      const double fd = (lp - lm) / (2.0 * step);
      const double rel = std::abs(ad[pi][i] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace vqssm
