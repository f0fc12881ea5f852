// Copyright 2026 The MTBR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mtbr/error.h"
#include "mtbr/ops.h"
#include "mtbr/params.h"
#include "mtbr/tagset.h"
#include "testing.h"

namespace mtbr {
namespace {

using doctest::Approx;

TEST_CASE("affine") {
  Matrix I(2, 2);
  I(0, 0) = I(1, 1) = 1.0;
  Matrix zero(2, 1);
  Vector x = {3.0, -1.0};
  CHECK(ops::Affine(I, zero, x) == Vector{3.0, -1.0});
  Matrix W(1, 2);
  W(0, 0) = 1.0;
  W(0, 1) = 2.0;
  Matrix b(1, 1, 1.0);
  CHECK(ops::Affine(W, b, Vector{1.0, 1.0}) == Vector{4.0});
}

TEST_CASE("softmax") {
  CHECK(ops::Softmax(Vector{0.0, 0.0}) == Vector{0.5, 0.5});
  CHECK(ops::Softmax(Vector{1000.0, 1000.0}) == Vector{0.5, 0.5});
  auto p = ops::Softmax(Vector{std::log(1.0), std::log(3.0)});
  CHECK(p[0] == Approx(0.25).epsilon(1e-15));
  CHECK(p[1] == Approx(0.75).epsilon(1e-15));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> scale(-8, 8);
  for (int k = 0; k < 1000; ++k) {
    Vector z(1 + rng() % 9);
    const double mag = std::pow(10.0, scale(rng) / 2);
    for (auto &v : z) v = mag * (scale(rng));
    auto q = ops::Softmax(z);
    CHECK(std::abs(std::accumulate(q.begin(), q.end(), 0.0) - 1.0) <= 1e-12);
    for (double v : q) CHECK(v >= 0.0);
  }
}

TEST_CASE("sigmoid") {
  CHECK(ops::Sigmoid(0.0) == 0.5);
  CHECK(ops::Sigmoid(-1000.0) >= 0.0);
  CHECK(ops::Sigmoid(-1000.0) < 1e-300);
  CHECK(ops::Sigmoid(std::log(3.0)) == Approx(0.75).epsilon(1e-15));
  for (double z : {-5.0, -0.3, 0.7, 12.0}) {
    CHECK(ops::Sigmoid(-z) == Approx(1.0 - ops::Sigmoid(z)).epsilon(1e-15));
    CHECK(ops::Sigmoid(z + 0.1) > ops::Sigmoid(z));
  }
}

TEST_CASE("cross entropy") {
  Vector uniform(kNumNerLabels, 1.0 / kNumNerLabels);
  Vector hard(kNumNerLabels, 0.0);
  hard[3] = 1.0;
  CHECK(std::abs(ops::CrossEntropy(uniform, hard) - std::log(7.0)) <= 1e-12);
  CHECK(ops::CrossEntropy(hard, hard) == 0.0);
  Vector half = {0.5, 0.5};
  CHECK(ops::CrossEntropy(half, half) == Approx(std::log(2.0)).epsilon(1e-15));
  // Unnormalized input is renormalized.
  CHECK(ops::CrossEntropy(Vector{1.0, 1.0}, Vector{1.0, 0.0}) ==
        Approx(std::log(2.0)).epsilon(1e-15));
  // Zero probability is clamped rather than infinite.
  CHECK(ops::CrossEntropy(Vector{1.0, 0.0}, Vector{0.0, 1.0}) ==
        Approx(-std::log(1e-12)).epsilon(1e-12));
  CHECK_THROWS_AS(ops::CrossEntropy(Vector{0.0, 0.0}, Vector{1.0, 0.0}), Error);
}

// Central-difference check of a function of one vector.
double CheckVectorGrad(const std::function<double(const Vector &)> &f,
                       const Vector &x, const Vector &analytic,
                       double eps = 1e-6) {
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    Vector up = x, down = x;
    up[i] += eps;
    down[i] -= eps;
    const double num = (f(up) - f(down)) / (2 * eps);
    const double denom = std::max({std::abs(num), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(num - analytic[i]) / denom);
  }
  return worst;
}

TEST_CASE("per-op gradients") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  auto rand_vec = [&](size_t n) {
    Vector v(n);
    for (auto &x : v) x = u(rng);
    return v;
  };

  SUBCASE("softmax then weighted sum") {
    const Vector z = rand_vec(5), w = rand_vec(5);
    auto f = [&](const Vector &zz) {
      auto p = ops::Softmax(zz);
      return std::inner_product(p.begin(), p.end(), w.begin(), 0.0);
    };
    Vector p = ops::Softmax(z), dz(5);
    ops::SoftmaxBackward(p, w, dz);
    CHECK(CheckVectorGrad(f, z, dz) < 1e-6);
  }
  SUBCASE("cross entropy, soft target, unnormalized p") {
    Vector p = rand_vec(4);
    for (auto &v : p) v = 0.2 + std::abs(v);
    const Vector t = {0.5, 0.0, 0.25, 0.25};
    auto f = [&](const Vector &pp) { return ops::CrossEntropy(pp, t); };
    Vector dp(4, 0.0);
    ops::CrossEntropyBackward(p, t, 1.0, dp);
    CHECK(CheckVectorGrad(f, p, dp) < 1e-6);
  }
  SUBCASE("affine input and weights") {
    ParameterStore store(1);
    auto W = store.Add("W", 3, 4, Init::kGlorotUniform);
    auto b = store.Add("b", 3, 1, Init::kGlorotUniform);
    const Vector x = rand_vec(4), w = rand_vec(3);
    auto loss = [&](ParameterStore &s, bool with_grad) {
      auto y = ops::Affine(s.value(W), s.value(b), x);
      if (with_grad) {
        Vector dx(4, 0.0);
        ops::AffineBackward(s.value(W), x, w, s.grad(W), s.grad(b), dx);
      }
      return std::inner_product(y.begin(), y.end(), w.begin(), 0.0);
    };
    CHECK(GradientCheck(store, loss).max_rel_error < 1e-6);
    // d sum(y) / dW = outer(1, x)
    store.ZeroGrads();
    Vector dx(4, 0.0);
    ops::AffineBackward(store.value(W), x, Vector(3, 1.0), store.grad(W),
                        store.grad(b), dx);
    for (size_t r = 0; r < 3; ++r) {
      for (size_t c = 0; c < 4; ++c) CHECK(store.grad(W)(r, c) == x[c]);
    }
    auto fx = [&](const Vector &xx) {
      auto y = ops::Affine(store.value(W), store.value(b), xx);
      return std::inner_product(y.begin(), y.end(), w.begin(), 0.0);
    };
    Vector dx2(4, 0.0);
    Matrix gW(3, 4), gb(3, 1);
    ops::AffineBackward(store.value(W), x, w, gW, gb, dx2);
    CHECK(CheckVectorGrad(fx, x, dx2) < 1e-6);
  }
  SUBCASE("sigmoid and tanh") {
    const Vector z = rand_vec(6);
    auto fs = [](const Vector &zz) {
      double s = 0;
      for (double v : zz) s += ops::Sigmoid(v);
      return s;
    };
    Vector ds(6);
    for (size_t i = 0; i < 6; ++i) ds[i] = ops::Sigmoid(z[i]) * (1 - ops::Sigmoid(z[i]));
    CHECK(CheckVectorGrad(fs, z, ds) < 1e-6);
    auto ft = [](const Vector &zz) {
      Vector c = zz;
      ops::TanhInPlace(c);
      return std::accumulate(c.begin(), c.end(), 0.0);
    };
    Vector dt(6);
    for (size_t i = 0; i < 6; ++i) dt[i] = 1 - std::tanh(z[i]) * std::tanh(z[i]);
    CHECK(CheckVectorGrad(ft, z, dt) < 1e-6);
  }
}

TEST_CASE("gradient check of a quadratic") {
  ParameterStore store;
  auto th = store.Add("theta", 2, 1, Init::kZeros);
  store.value(th)[0] = 1.0;
  store.value(th)[1] = 2.0;
  auto loss = [&](ParameterStore &s, bool with_grad) {
    const auto &v = s.value(th);
    if (with_grad) {
      s.grad(th)[0] += 2 * v[0];
      s.grad(th)[1] += 2 * v[1];
    }
    return v[0] * v[0] + v[1] * v[1];
  };
  auto res = GradientCheck(store, loss);
  CHECK(res.max_rel_error < 1e-8);
  CHECK(res.components_checked == 2);

  auto bad = [&](ParameterStore &s, bool with_grad) {
    if (with_grad) s.grad(th)[1] += 1.0;
    return s.value(th)[1] * s.value(th)[1];
  };
  auto r2 = GradientCheck(store, bad);
  CHECK(r2.worst_param == "theta");
  CHECK(r2.worst_index == 1);
  CHECK(r2.max_rel_error > 0.5);

  auto nan_loss = [](ParameterStore &, bool) { return std::nan(""); };
  CHECK_THROWS_AS(GradientCheck(store, nan_loss), Error);
}

TEST_CASE("parameter store") {
  ParameterStore store(3);
  auto w = store.Add("w", 4, 6, Init::kGlorotUniform);
  auto b = store.Add("b", 4, 1, Init::kZeros);
  CHECK_THROWS_AS(store.Add("w", 1, 1, Init::kZeros), Error);
  const double limit = std::sqrt(6.0 / 10.0);
  for (double v : store.value(w).data()) CHECK(std::abs(v) <= limit);
  for (double v : store.value(b).data()) CHECK(v == 0.0);
  CHECK(store.grad(w).SameShape(store.value(w)));
  store.grad(w)(1, 1) = 3.0;
  store.ZeroGrads();
  for (double v : store.grad(w).data()) CHECK(v == 0.0);
  CHECK(store.Require("b") == b);
  CHECK_FALSE(store.Find("nope"));
  CHECK(store.ScalarCount() == 28);

  ParameterStore again(3);
  again.Add("w", 4, 6, Init::kGlorotUniform);
  CHECK(again.value(0) == store.value(w));
}

TEST_CASE("sgd") {
  ParameterStore store;
  auto p = store.Add("p", 1, 1, Init::kZeros);
  store.grad(p)[0] = 1.0;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgd;
  cfg.learning_rate = 0.1;
  Optimizer opt(cfg);
  opt.StepAll(store);
  CHECK(store.value(p)[0] == Approx(-0.1).epsilon(1e-15));
  store.ZeroGrads();
  opt.StepAll(store);
  CHECK(store.value(p)[0] == Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("adam against the reference formula") {
  ParameterStore store;
  auto p = store.Add("p", 3, 1, Init::kZeros);
  Vector w = {0.5, -1.0, 2.0};
  store.value(p).data() = w;
  OptimizerConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 0.1;
  Optimizer opt(cfg);
  const std::vector<Vector> grads = {{0.3, -0.2, 0.0}, {-1.0, 0.5, 0.25}, {0.1, 0.1, -0.4}};
  Vector m(3, 0.0), v(3, 0.0);
  for (size_t t = 1; t <= grads.size(); ++t) {
    store.grad(p).data() = grads[t - 1];
    opt.StepAll(store);
    for (size_t i = 0; i < 3; ++i) {
      const double g = grads[t - 1][i] + 0.1 * w[i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      w[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(store.value(p)[i] == Approx(w[i]).epsilon(1e-14));
    }
  }
  // First step magnitude is lr for a nonzero gradient without decay.
  ParameterStore s2;
  auto q = s2.Add("q", 1, 1, Init::kZeros);
  s2.grad(q)[0] = -3.0;
  Optimizer plain(OptimizerConfig{});
  plain.StepAll(s2);
  CHECK(s2.value(q)[0] == Approx(5e-3).epsilon(1e-9));
}

TEST_CASE("adam steps only the requested parameters") {
  ParameterStore store;
  auto a = store.Add("a", 1, 1, Init::kZeros);
  auto b = store.Add("b", 1, 1, Init::kZeros);
  store.grad(a)[0] = 1.0;
  store.grad(b)[0] = 1.0;
  Optimizer opt(OptimizerConfig{});
  std::vector<ParamId> only_a = {a};
  opt.Step(store, only_a);
  CHECK(store.value(a)[0] != 0.0);
  CHECK(store.value(b)[0] == 0.0);
}

TEST_CASE("checkpoint round trip and mismatches") {
  testing::TempDir dir;
  ParameterStore store(8);
  store.Add("w", 3, 2, Init::kGlorotUniform);
  store.Add("b", 3, 1, Init::kGlorotUniform);
  store.rng()();
  SaveCheckpoint(dir.File("c.ckpt"), store);

  ParameterStore loaded(0);
  loaded.Add("w", 3, 2, Init::kZeros);
  loaded.Add("b", 3, 1, Init::kZeros);
  LoadCheckpoint(dir.File("c.ckpt"), loaded);
  CHECK(loaded.value(0) == store.value(0));
  CHECK(loaded.value(1) == store.value(1));
  CHECK(loaded.seed() == 8);
  CHECK(loaded.rng()() == store.rng()());

  ParameterStore wrong_shape;
  wrong_shape.Add("w", 2, 3, Init::kZeros);
  wrong_shape.Add("b", 3, 1, Init::kZeros);
  CHECK_THROWS_AS(LoadCheckpoint(dir.File("c.ckpt"), wrong_shape), Error);
  ParameterStore wrong_name;
  wrong_name.Add("v", 3, 2, Init::kZeros);
  wrong_name.Add("b", 3, 1, Init::kZeros);
  CHECK_THROWS_AS(LoadCheckpoint(dir.File("c.ckpt"), wrong_name), Error);
  CHECK_THROWS_AS(LoadCheckpoint(dir.File("none.ckpt"), loaded), Error);
}

TEST_CASE("uniform unit") {
  std::mt19937_64 a(1), b(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = UniformUnit(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == static_cast<double>(b() >> 11) * 0x1.0p-53);
  }
}

}  // namespace
}  // namespace mtbr
