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

#include "mtbr/ops.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mtbr/error.h"

namespace mtbr::ops {

namespace {

void CheckShape(bool ok, const char *what) {
  if (!ok) throw Error(ErrorCode::kShapeMismatch, what);
}

double Sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

void Affine(const Matrix &W, const Matrix &b, std::span<const double> x,
            std::span<double> y) {
  CheckShape(W.cols() == x.size(), "affine: W columns != |x|");
  CheckShape(W.rows() == y.size() && b.size() == y.size(),
             "affine: W rows, |b| and |y| differ");
  const size_t n = W.cols();
  for (size_t r = 0; r < W.rows(); ++r) {
    const double *w = W.data().data() + r * n;
    double acc = b[r];
    for (size_t c = 0; c < n; ++c) acc += w[c] * x[c];
    y[r] = acc;
  }
}

Vector Affine(const Matrix &W, const Matrix &b, std::span<const double> x) {
  Vector y(W.rows());
  Affine(W, b, x, y);
  return y;
}

void AffineBackward(const Matrix &W, std::span<const double> x,
                    std::span<const double> dy, Matrix &dW, Matrix &db,
                    std::span<double> dx) {
  CheckShape(dW.SameShape(W), "affine backward: dW shape");
  CheckShape(dy.size() == W.rows() && db.size() == W.rows(),
             "affine backward: dy/db shape");
  CheckShape(x.size() == W.cols(), "affine backward: x shape");
  CheckShape(dx.empty() || dx.size() == W.cols(), "affine backward: dx shape");
  const size_t n = W.cols();
  for (size_t r = 0; r < W.rows(); ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    db[r] += g;
    double *dw = dW.data().data() + r * n;
    const double *w = W.data().data() + r * n;
    for (size_t c = 0; c < n; ++c) dw[c] += g * x[c];
    if (!dx.empty()) {
      for (size_t c = 0; c < n; ++c) dx[c] += g * w[c];
    }
  }
}

void Softmax(std::span<const double> z, std::span<double> p) {
  CheckShape(z.size() == p.size() && !z.empty(), "softmax: shape");
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    s += p[i];
  }
  for (auto &v : p) v /= s;
}

Vector Softmax(std::span<const double> z) {
  Vector p(z.size());
  Softmax(z, p);
  return p;
}

void SoftmaxBackward(std::span<const double> p, std::span<const double> dp,
                     std::span<double> dz) {
  double dot = 0.0;
  for (size_t i = 0; i < p.size(); ++i) dot += dp[i] * p[i];
  for (size_t i = 0; i < p.size(); ++i) dz[i] = p[i] * (dp[i] - dot);
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void TanhInPlace(std::span<double> v) {
  for (auto &x : v) x = std::tanh(x);
}

double CrossEntropy(std::span<const double> p,
                    std::span<const double> target) {
  CheckShape(p.size() == target.size(), "cross entropy: shape");
  const double s = Sum(p);
  if (!(s > 0.0)) {
    throw Error(ErrorCode::kDegenerateInput, "cross entropy: p sums to zero");
  }
  const double norm = std::abs(s - 1.0) > kRenormTolerance ? s : 1.0;
  double loss = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (target[i] == 0.0) continue;
    loss -= target[i] * std::log(std::max(p[i] / norm, kLogClamp));
  }
  return loss;
}

void CrossEntropyBackward(std::span<const double> p,
                          std::span<const double> target, double scale,
                          std::span<double> dp) {
  const double s = Sum(p);
  if (!(s > 0.0)) {
    throw Error(ErrorCode::kDegenerateInput, "cross entropy: p sums to zero");
  }
  const bool renorm = std::abs(s - 1.0) > kRenormTolerance;
  const double norm = renorm ? s : 1.0;
  // d/dp_j of -sum_i t_i log(p_i / S) = -t_j / p_j + (sum_i t_i) / S
  double t_sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (target[i] == 0.0) continue;
    if (p[i] / norm > kLogClamp) {
      dp[i] -= scale * target[i] / p[i];
      t_sum += target[i];
    }
  }
  if (renorm) {
    for (auto &g : dp) g += scale * t_sum / s;
  }
}

int Argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace mtbr::ops
