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

#include <omp.h>

#include <exception>

#include "mtbr/kernels.h"

namespace mtbr::kernels {

namespace parallel {

BatchGradient AccumulateBatch(const MtbrModel &model,
                              std::span<const Example> batch, Phase phase,
                              const Variant &variant,
                              std::span<const double> draws, int threads) {
  const long n = static_cast<long>(batch.size());
  std::vector<Gradients> per_sentence(n);
  std::vector<double> losses(n, 0.0);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long s = 0; s < n; ++s) {
    try {
      per_sentence[s] = model.params().MakeGradients();
      const double draw = s < static_cast<long>(draws.size()) ? draws[s] : 0.0;
      losses[s] = model.PhaseLoss(batch[s], phase, variant, draw, &per_sentence[s]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  BatchGradient out;
  out.grads = model.params().MakeGradients();
  for (long s = 0; s < n; ++s) out.loss_sum += losses[s];

  // Reduce each component across sentences in sentence order.
  const long n_params = static_cast<long>(out.grads.size());
  for (long p = 0; p < n_params; ++p) {
    auto &dst = out.grads[p].data();
    const long size = static_cast<long>(dst.size());
#pragma omp parallel for schedule(static) num_threads(threads) if (size > 4096)
    for (long i = 0; i < size; ++i) {
      double acc = 0.0;
      for (long s = 0; s < n; ++s) acc += per_sentence[s][p][i];
      dst[i] = acc;
    }
  }
  return out;
}

std::vector<TagSequence> PredictBatch(const MtbrModel &model,
                                      std::span<const std::vector<int>> ids,
                                      const Variant &variant, int threads) {
  const long n = static_cast<long>(ids.size());
  std::vector<TagSequence> out(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
  for (long s = 0; s < n; ++s) {
    try {
      out[s] = model.PredictTags(ids[s], variant);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace parallel

BatchGradient AccumulateBatch(const MtbrModel &model,
                              std::span<const Example> batch, Phase phase,
                              const Variant &variant,
                              std::span<const double> draws, int threads) {
  if (threads <= 1) return serial::AccumulateBatch(model, batch, phase, variant, draws);
  return parallel::AccumulateBatch(model, batch, phase, variant, draws, threads);
}

std::vector<TagSequence> PredictBatch(const MtbrModel &model,
                                      std::span<const std::vector<int>> ids,
                                      const Variant &variant, int threads) {
  if (threads <= 1) return serial::PredictBatch(model, ids, variant);
  return parallel::PredictBatch(model, ids, variant, threads);
}

int DefaultThreads() { return omp_get_max_threads(); }

}  // namespace mtbr::kernels
