#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "ops.hpp"

using namespace vqssm;

TEST_CASE("tensor shape and data invariants") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
}

TEST_CASE("matmul identity") {
  Rng rng(7);
  Tensor x = Tensor::randn({3, 5}, rng);
  Tape t;
  Var vx = t.leaf(x);
  Var y = matmul(t, t.leaf(Tensor::identity(3)), vx);
  for (int64_t i = 0; i < x.size(); ++i) CHECK(t.val(y)[i] == x[i]);
}

TEST_CASE("matmul shape error") {
  Tape t;
  Var a = t.leaf(Tensor::zeros({2, 3}));
  Var b = t.leaf(Tensor::zeros({4, 2}));
  CHECK_THROWS_AS(matmul(t, a, b), DimensionError);
}

TEST_CASE("layer_norm pre-affine rows have mean 0 and variance 1") {
  Rng rng(11);
  Tensor x = Tensor::randn({4, 16}, rng);
  Tape t;
  Var y = layer_norm(t, t.leaf(x), t.leaf(Tensor::full({16}, 1.0)), t.leaf(Tensor::zeros({16})));
  const Tensor& yv = t.val(y);
  for (int64_t i = 0; i < 4; ++i) {
    double mu = 0.0, var = 0.0;
    for (int64_t j = 0; j < 16; ++j) mu += yv.at(i, j);
    mu /= 16.0;
    for (int64_t j = 0; j < 16; ++j) var += (yv.at(i, j) - mu) * (yv.at(i, j) - mu);
    var /= 16.0;
    CHECK(std::abs(mu) <= 1e-12);
    CHECK(std::abs(var - 1.0) <= 1e-12);
  }
}

TEST_CASE("gather then gather by inverse is exact") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const int64_t n = rng.uniform_int(1, 24);
    Tensor x = Tensor::randn({n, 4}, rng);
    std::vector<int64_t> perm(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    for (int64_t i = n - 1; i > 0; --i) std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(rng.uniform_int(0, i))]);
    std::vector<int64_t> inv(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) inv[static_cast<size_t>(perm[static_cast<size_t>(i)])] = i;
    Tape t;
    Var vx = t.leaf(x);
    Var back = gather_rows(t, gather_rows(t, vx, perm), inv);
    CHECK(t.val(back).content_hash() == x.content_hash());
  }
}

TEST_CASE("backward of sum is all-ones, of sum of squares is 2x") {
  Rng rng(5);
  Tensor x = Tensor::randn({3, 4}, rng);
  {
    Tape t;
    Var vx = t.leaf(x, true);
    t.backward(sum(t, vx));
    for (int64_t i = 0; i < x.size(); ++i) CHECK(t.grad(vx)[i] == 1.0);
  }
  {
    Tape t;
    Var vx = t.leaf(x, true);
    t.backward(sum(t, mul(t, vx, vx)));
    for (int64_t i = 0; i < x.size(); ++i) CHECK(t.grad(vx)[i] == doctest::Approx(2.0 * x[i]).epsilon(1e-14));
  }
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape t;
  Var vx = t.leaf(Tensor::zeros({2, 2}), true);
  CHECK_THROWS_AS(t.backward(vx), ContractError);
}

TEST_CASE("fan-out accumulates additively") {
  Tape t;
  Var vx = t.leaf(Tensor::full({3}, 2.0), true);
  Var y = add(t, vx, vx);
  t.backward(sum(t, y));
  for (int64_t i = 0; i < 3; ++i) CHECK(t.grad(vx)[i] == 2.0);
}

TEST_CASE("grad_check core examples") {
  Rng rng(17);
  SUBCASE("sum of sigmoid") {
    Tensor x = Tensor::randn({8}, rng);
    const double err = grad_check([](Tape& t, Var v) { return sum(t, sigmoid(t, v)); }, x, 1e-6);
    CHECK(err <= 1e-7);
  }
  SUBCASE("layer_norm then linear") {
    Tensor x = Tensor::randn({3, 8}, rng);
    Tensor w = Tensor::randn({8, 4}, rng);
    const double err = grad_check(
        [&](Tape& t, Var v) {
          Var ln = layer_norm(t, v, t.leaf(Tensor::full({8}, 1.0)), t.leaf(Tensor::zeros({8})));
          return sum(t, matmul(t, ln, t.leaf(w)));
        },
        x, 1e-6);
    CHECK(err <= 1e-6);
  }
  SUBCASE("linear map is near-exact") {
    Tensor x = Tensor::randn({4, 4}, rng);
    Tensor w = Tensor::randn({4, 4}, rng);
    const double err = grad_check([&](Tape& t, Var v) { return sum(t, matmul(t, v, t.leaf(w))); }, x, 1e-6);
    CHECK(err <= 1e-9);
  }
  SUBCASE("random two-layer composition") {
    Tensor x = Tensor::randn({2, 6}, rng);
    Tensor w1 = Tensor::randn({6, 5}, rng);
    Tensor w2 = Tensor::randn({5, 3}, rng);
    const double err = grad_check(
        [&](Tape& t, Var v) {
          Var h = silu(t, matmul(t, v, t.leaf(w1)));
          return sum(t, matmul(t, h, t.leaf(w2)));
        },
        x, 1e-6);
    CHECK(err <= 1e-6);
  }
}

TEST_CASE("grad_check over every differentiable op, 20 seeds") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    Tensor x = Tensor::randn({3, 6}, rng);
    Tensor b = Tensor::randn({6}, rng);
    Tensor w = Tensor::randn({6, 4}, rng);
    Tensor k = Tensor::randn({6, 3}, rng);
    Tensor cb = Tensor::randn({6}, rng);
    Tensor l1_target = Tensor::randn({6}, rng);
    Tensor box = Tensor({4}, {0.5, 0.5, 0.4, 0.3});

    auto check = [&](const std::function<Var(Tape&, Var)>& f, double tol = 1e-5) {
      CHECK(grad_check(f, x, 1e-6) <= tol);
    };
    check([&](Tape& t, Var v) { return sum(t, add(t, v, t.leaf(b))); });
    check([&](Tape& t, Var v) { return sum(t, sub(t, v, t.leaf(b))); });
    check([&](Tape& t, Var v) { return sum(t, mul(t, v, t.leaf(b))); });
    check([&](Tape& t, Var v) { return sum(t, mul(t, v, v)); });
    check([&](Tape& t, Var v) { return sum(t, scale(t, v, 2.5)); });
    check([&](Tape& t, Var v) { return sum(t, silu(t, v)); });
    check([&](Tape& t, Var v) { return sum(t, softplus(t, v)); });
    check([&](Tape& t, Var v) { return sum(t, exp_op(t, scale(t, v, 0.3))); });
    check([&](Tape& t, Var v) { return sum(t, matmul(t, v, t.leaf(w))); });
    check([&](Tape& t, Var v) { return sum(t, softmax_rows(t, v)); }, 2e-5);
    check([&](Tape& t, Var v) {
      return sum(t, conv_causal_depthwise(t, v, t.leaf(k), t.leaf(cb)));
    });
    check([&](Tape& t, Var v) { return sum(t, concat_rows(t, v, scale(t, v, -1.0))); });
    check([&](Tape& t, Var v) { return sum(t, slice_rows(t, v, 1, 3)); });
    check([&](Tape& t, Var v) { return sum(t, gather_rows(t, v, {2, 0, 1, 2})); });
    check([&](Tape& t, Var v) { return sum(t, mean_rows(t, v)); });
    check([&](Tape& t, Var v) {
      return cross_entropy_logits(t, mean_rows(t, v), 2);
    });
    check([&](Tape& t, Var v) { return l1_to_const(t, mean_rows(t, v), l1_target); });
    check([&](Tape& t, Var v) {
      Var bx = sigmoid(t, mean_rows(t, matmul(t, v, t.leaf(w))));
      return giou_with_const(t, bx, box);
    }, 2e-5);
  }
}

TEST_CASE("softmax rows sum to one and gradients vanish on uniform upstream") {
  Rng rng(23);
  Tensor x = Tensor::randn({2, 5}, rng);
  Tape t;
  Var vx = t.leaf(x, true);
  Var sm = softmax_rows(t, vx);
  t.backward(sum(t, sm));
  const Tensor& yv = t.val(sm);
  for (int64_t i = 0; i < 2; ++i) {
    double s = 0.0;
    for (int64_t j = 0; j < 5; ++j) s += yv.at(i, j);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (int64_t i = 0; i < x.size(); ++i) CHECK(std::abs(t.grad(vx)[i]) <= 1e-15);
}

TEST_CASE("tape replay is deterministic") {
  auto run = [] {
    Rng rng(99);
    Tensor x = Tensor::randn({4, 8}, rng);
    Tensor w = Tensor::randn({8, 8}, rng);
    Tape t;
    Var vx = t.leaf(x, true);
    Var y = silu(t, matmul(t, vx, t.leaf(w)));
    Var loss = sum(t, mul(t, y, y));
    t.backward(loss);
    return std::pair<uint64_t, uint64_t>{t.val(loss).content_hash(), t.grad(vx).content_hash()};
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite op output raises numeric error in f64 mode") {
  Tape t;
  Var vx = t.leaf(Tensor::full({2}, 1000.0));
  CHECK_THROWS_AS(exp_op(t, vx), NumericError);
}

TEST_CASE("f32 fast mode stores float-representable values") {
  set_precision_mode(Precision::f32);
  Tape t;
  Var vx = t.leaf(Tensor::full({1}, 1.0));
  Var y = add_const(t, vx, 1e-9);  // 1 + 1e-9 rounds back to 1 in float
  CHECK(t.val(y)[0] == 1.0);
  set_precision_mode(Precision::f64);
}

TEST_CASE("iou and giou plain values") {
  const double a[4] = {0.5, 0.5, 0.2, 0.2};
  CHECK(iou_value(a, a) == doctest::Approx(1.0));
  CHECK(giou_value(a, a) == doctest::Approx(1.0));
  const double b[4] = {0.1, 0.1, 0.1, 0.1};
  CHECK(iou_value(a, b) == 0.0);
  CHECK(giou_value(a, b) < 0.0);
  CHECK(giou_value(a, b) >= -1.0);
}
