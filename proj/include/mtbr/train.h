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

#ifndef MTBR_TRAIN_H_
#define MTBR_TRAIN_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "json.hpp"
#include "mtbr/model.h"
#include "mtbr/params.h"

namespace mtbr {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 16;
  std::uint64_t seed = 1;
  int threads = 1;
  bool freeze_bd_in_ner = false;
  OptimizerConfig optimizer;

  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json &j);
};

struct EpochReport {
  int epoch = 0;
  double bd_loss = 0.0;   // mean over bd steps
  double ner_loss = 0.0;  // mean over ner steps
  int bd_steps = 0;
  int ner_steps = 0;
};

// Alternating trainer: boundary-detection and NER objectives take turns,
// one mini-batch each, starting with boundary detection. Without the BD
// task every step is an NER step.
class Trainer {
 public:
  Trainer(MtbrModel &model, Variant variant, TrainConfig cfg);

  Phase next_phase() const { return next_; }
  const Variant &variant() const { return variant_; }

  // One optimizer step on `batch` in the next phase; returns the mean loss.
  double Step(std::span<const Example> batch);

  EpochReport RunEpoch(std::span<const Example> data);
  std::vector<EpochReport> Fit(
      std::span<const Example> data,
      const std::function<void(const EpochReport &)> &on_epoch = {});

 private:
  MtbrModel &model_;
  Variant variant_;
  TrainConfig cfg_;
  Optimizer optimizer_;
  std::mt19937_64 rng_;
  Phase next_ = Phase::kBd;
  int epoch_ = 0;
};

std::vector<Example> PrepareExamples(const MtbrModel &model,
                                     std::span<const LabeledSentence> data);

}  // namespace mtbr

#endif  // MTBR_TRAIN_H_
