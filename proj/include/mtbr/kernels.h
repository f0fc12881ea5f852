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

#ifndef MTBR_KERNELS_H_
#define MTBR_KERNELS_H_

#include <span>
#include <vector>

#include "mtbr/model.h"

// Batch-level kernels. Each has a serial reference implementation and an
// OpenMP version; both reduce per-sentence results in sentence order, so
// they produce bit-identical output for any thread count.
namespace mtbr::kernels {

struct BatchGradient {
  double loss_sum = 0.0;
  Gradients grads;  // sum of per-sentence gradients, unscaled
};

namespace serial {

BatchGradient AccumulateBatch(const MtbrModel &model,
                              std::span<const Example> batch, Phase phase,
                              const Variant &variant,
                              std::span<const double> draws);

std::vector<TagSequence> PredictBatch(const MtbrModel &model,
                                      std::span<const std::vector<int>> ids,
                                      const Variant &variant);

}  // namespace serial

namespace parallel {

BatchGradient AccumulateBatch(const MtbrModel &model,
                              std::span<const Example> batch, Phase phase,
                              const Variant &variant,
                              std::span<const double> draws, int threads);

std::vector<TagSequence> PredictBatch(const MtbrModel &model,
                                      std::span<const std::vector<int>> ids,
                                      const Variant &variant, int threads);

}  // namespace parallel

// threads <= 1 runs the serial reference.
BatchGradient AccumulateBatch(const MtbrModel &model,
                              std::span<const Example> batch, Phase phase,
                              const Variant &variant,
                              std::span<const double> draws, int threads);
std::vector<TagSequence> PredictBatch(const MtbrModel &model,
                                      std::span<const std::vector<int>> ids,
                                      const Variant &variant, int threads);

int DefaultThreads();

}  // namespace mtbr::kernels

#endif  // MTBR_KERNELS_H_
