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

#ifndef MTBR_EVAL_H_
#define MTBR_EVAL_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtbr/corpus.h"
#include "mtbr/model.h"
#include "mtbr/train.h"

namespace mtbr {

struct PrfCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::array<PrfCounts, 3> per_type{};  // PER, LOC, ORG

  nlohmann::json ToJson() const;
};

using SpanLists = std::vector<std::vector<EntitySpan>>;

// Exact (start, end, type) matching within each sentence; micro-averaged.
Prf EntityPrf(std::span<const std::vector<EntitySpan>> gold,
              std::span<const std::vector<EntitySpan>> pred);

struct BreReport {
  std::int64_t predicted_count = 0;
  std::int64_t boundary_error_count = 0;
  double bre_ratio = 0.0;

  nlohmann::json ToJson() const;
};

// A predicted span is a boundary error when it shares a token with a gold
// span of the same type but its (start, end) differs from every such span.
// The ratio is over all predicted spans.
BreReport BreRatio(std::span<const std::vector<EntitySpan>> gold,
                   std::span<const std::vector<EntitySpan>> pred);

double TokenAccuracy(std::span<const TagSequence> gold,
                     std::span<const TagSequence> pred);

struct EvalResult {
  Prf prf;
  BreReport bre;
  double token_accuracy = 0.0;
  std::vector<TagSequence> predictions;

  nlohmann::json ToJson() const;
};

EvalResult EvaluateModel(const MtbrModel &model,
                         std::span<const LabeledSentence> data,
                         const Variant &variant, int threads = 1);

struct ExperimentConfig {
  HyperParams hyper;
  TrainConfig train;
};

// Builds a model on `train`, fits it and evaluates on `test`.
struct ExperimentResult {
  EvalResult eval;
  std::vector<EpochReport> epochs;
};
ExperimentResult TrainAndEvaluate(std::span<const LabeledSentence> train,
                                  std::span<const LabeledSentence> test,
                                  const ExperimentConfig &cfg,
                                  const Variant &variant);

struct AblationRow {
  std::string variant;
  int runs = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double bre = 0.0;
  std::vector<double> f1_per_seed;
  std::vector<double> bre_per_seed;
  std::string error;  // non-empty when the variant aborted
};

// Trains and evaluates every variant for every seed (hyper.seed and
// train.seed are both set to the seed) and reports per-variant means.
std::vector<AblationRow> AblationRun(
    const DatasetSplit &split, const ExperimentConfig &base,
    std::span<const std::uint64_t> seeds,
    std::span<const NamedVariant> variants,
    const std::function<void(const std::string &, std::uint64_t,
                             const EvalResult &)> &on_run = {});

std::string FormatAblationTable(std::span<const AblationRow> rows);
nlohmann::json AblationToJson(std::span<const AblationRow> rows);

}  // namespace mtbr

#endif  // MTBR_EVAL_H_
