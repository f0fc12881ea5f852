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

#include "mtbr/kernels.h"

namespace mtbr::kernels::serial {

BatchGradient AccumulateBatch(const MtbrModel &model,
                              std::span<const Example> batch, Phase phase,
                              const Variant &variant,
                              std::span<const double> draws) {
  BatchGradient out;
  out.grads = model.params().MakeGradients();
  Gradients scratch = model.params().MakeGradients();
  for (size_t s = 0; s < batch.size(); ++s) {
    ZeroGradients(scratch);
    const double draw = s < draws.size() ? draws[s] : 0.0;
    out.loss_sum += model.PhaseLoss(batch[s], phase, variant, draw, &scratch);
    AddGradients(out.grads, scratch);
  }
  return out;
}

std::vector<TagSequence> PredictBatch(const MtbrModel &model,
                                      std::span<const std::vector<int>> ids,
                                      const Variant &variant) {
  std::vector<TagSequence> out;
  out.reserve(ids.size());
  for (const auto &s : ids) out.push_back(model.PredictTags(s, variant));
  return out;
}

}  // namespace mtbr::kernels::serial
