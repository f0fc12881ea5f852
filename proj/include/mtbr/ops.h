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

#ifndef MTBR_OPS_H_
#define MTBR_OPS_H_

#include <span>

#include "mtbr/tensor.h"

namespace mtbr::ops {

// y = W x + b. W is d_out x d_in, b is d_out x 1.
void Affine(const Matrix &W, const Matrix &b, std::span<const double> x,
            std::span<double> y);
Vector Affine(const Matrix &W, const Matrix &b, std::span<const double> x);

// Accumulates dW += dy x^T, db += dy and, when dx is non-empty,
// dx += W^T dy.
void AffineBackward(const Matrix &W, std::span<const double> x,
                    std::span<const double> dy, Matrix &dW, Matrix &db,
                    std::span<double> dx);

// Max-subtracted softmax.
void Softmax(std::span<const double> z, std::span<double> p);
Vector Softmax(std::span<const double> z);
// dz = p * (dp - <dp, p>), written (not accumulated) into dz.
void SoftmaxBackward(std::span<const double> p, std::span<const double> dp,
                     std::span<double> dz);

double Sigmoid(double z);

// Elementwise tanh, in place.
void TanhInPlace(std::span<double> v);

// Cross entropy -sum t log p with log clamped at 1e-12. `p` is renormalized
// first when its sum is off by more than 1e-9. Throws kDegenerateInput on an
// all-zero p.
double CrossEntropy(std::span<const double> p, std::span<const double> target);
// Gradient of CrossEntropy w.r.t. p, accumulated into dp after scaling.
void CrossEntropyBackward(std::span<const double> p,
                          std::span<const double> target, double scale,
                          std::span<double> dp);

inline constexpr double kLogClamp = 1e-12;
inline constexpr double kRenormTolerance = 1e-9;

int Argmax(std::span<const double> v);

}  // namespace mtbr::ops

#endif  // MTBR_OPS_H_
