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

#ifndef MTBR_LOOP_H_
#define MTBR_LOOP_H_

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtbr/audit.h"
#include "mtbr/corpus.h"
#include "mtbr/eval.h"
#include "mtbr/model.h"

namespace mtbr {

struct LoopConfig {
  ExperimentConfig experiment;
  Variant variant;
  double epsilon = 0.01;
  int max_iters = 10;
};

struct IterationOutcome {
  IterationReport report;
  std::vector<TagSequence> predictions;
  std::vector<AuditItem> enqueued;
};

// Disagreement and audit counts; dev metrics are left empty.
IterationReport SummarizePredictions(std::span<const LabeledSentence> dataset,
                                     std::span<const TagSequence> predictions,
                                     int iteration);

// Trains on `dataset`, predicts it back and counts sentences whose
// prediction differs from the stored tags. Dev metrics come from `dev` when
// given, otherwise from the dataset itself.
IterationOutcome RunIteration(std::span<const LabeledSentence> dataset,
                              std::span<const LabeledSentence> dev,
                              const LoopConfig &cfg, int iteration);

// Train -> predict -> audit -> merge cycle over a dataset file and an audit
// store. Each call to Iterate merges resolved items into the dataset,
// rewrites the dataset file, runs one iteration and queues the conflicts.
class AuditLoop {
 public:
  AuditLoop(std::string dataset_path, std::optional<std::string> dev_path,
            AuditStore &store, LoopConfig cfg);

  IterationOutcome Iterate();
  bool Converged() const;
  nlohmann::json Progress() const;
  const LoopConfig &config() const { return cfg_; }

 private:
  std::string dataset_path_;
  std::optional<std::string> dev_path_;
  AuditStore &store_;
  LoopConfig cfg_;
  mutable std::mutex mu_;
};

}  // namespace mtbr

#endif  // MTBR_LOOP_H_
