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

#include "mtbr/loop.h"

#include <spdlog/spdlog.h>

#include "mtbr/error.h"
#include "mtbr/train.h"

namespace mtbr {

IterationReport SummarizePredictions(std::span<const LabeledSentence> dataset,
                                     std::span<const TagSequence> predictions,
                                     int iteration) {
  if (dataset.size() != predictions.size()) {
    throw Error(ErrorCode::kShapeMismatch, "predictions not aligned with dataset");
  }
  if (dataset.empty()) throw Error(ErrorCode::kTooFewSentences, "empty dataset");
  IterationReport r;
  for (size_t s = 0; s < dataset.size(); ++s) {
    r.disagreement_count += predictions[s] != dataset[s].ner_tags;
    r.audited_count += dataset[s].provenance == Provenance::kAudited;
  }
  r.iteration = iteration;
  r.dataset_size = static_cast<std::int64_t>(dataset.size());
  r.disagreement_rate =
      static_cast<double>(r.disagreement_count) / static_cast<double>(dataset.size());
  return r;
}

IterationOutcome RunIteration(std::span<const LabeledSentence> dataset,
                              std::span<const LabeledSentence> dev,
                              const LoopConfig &cfg, int iteration) {
  if (dataset.empty()) {
    throw Error(ErrorCode::kTooFewSentences, "empty dataset");
  }
  MtbrModel model(cfg.experiment.hyper, TokenIndex::Build(dataset));
  auto examples = PrepareExamples(model, dataset);
  Trainer trainer(model, cfg.variant, cfg.experiment.train);
  trainer.Fit(examples);

  const int threads = cfg.experiment.train.threads;
  auto self = EvaluateModel(model, dataset, cfg.variant, threads);
  IterationOutcome out;
  out.predictions = std::move(self.predictions);

  auto &r = out.report;
  r = SummarizePredictions(dataset, out.predictions, iteration);
  if (dev.empty()) {
    self.predictions.clear();
    r.dev_metrics = self.ToJson();
  } else {
    auto ev = EvaluateModel(model, dev, cfg.variant, threads);
    ev.predictions.clear();
    r.dev_metrics = ev.ToJson();
  }
  return out;
}

AuditLoop::AuditLoop(std::string dataset_path,
                     std::optional<std::string> dev_path, AuditStore &store,
                     LoopConfig cfg)
    : dataset_path_(std::move(dataset_path)),
      dev_path_(std::move(dev_path)),
      store_(store),
      cfg_(std::move(cfg)) {}

IterationOutcome AuditLoop::Iterate() {
  std::lock_guard lock(mu_);
  auto dataset = ReadBio2File(dataset_path_);
  std::vector<LabeledSentence> dev;
  if (dev_path_) dev = ReadBio2File(*dev_path_);

  const auto resolved = store_.Resolved();
  dataset = MergeResolved(dataset, resolved);
  WriteBio2File(dataset_path_, dataset);

  const auto history = store_.Reports();
  const int iteration = history.empty() ? 1 : history.back().iteration + 1;
  auto out = RunIteration(dataset, dev, cfg_, iteration);
  out.enqueued = store_.EnqueueConflicts(dataset, out.predictions, iteration);

  auto reports = history;
  reports.push_back(out.report);
  out.report.converged =
      CheckConvergence(reports, cfg_.epsilon, cfg_.max_iters);
  store_.AppendReport(out.report);
  spdlog::info(
      "iteration {}: {} of {} sentences disagree ({:.4f}), {} queued{}",
      iteration, out.report.disagreement_count, out.report.dataset_size,
      out.report.disagreement_rate, out.enqueued.size(),
      out.report.converged ? ", converged" : "");
  return out;
}

bool AuditLoop::Converged() const {
  const auto reports = store_.Reports();
  return !reports.empty() && reports.back().converged;
}

nlohmann::json AuditLoop::Progress() const {
  nlohmann::json history = nlohmann::json::array();
  for (const auto &r : store_.Reports()) history.push_back(r.ToJson());
  nlohmann::json counts = nlohmann::json::object();
  for (auto s : {AuditStatus::kPending, AuditStatus::kOneDecision,
                 AuditStatus::kConflicted, AuditStatus::kResolved}) {
    counts[std::string(AuditStatusName(s))] = store_.ItemsWithStatus(s).size();
  }
  return {{"iterations", history},
          {"queue", counts},
          {"converged", Converged()},
          {"epsilon", cfg_.epsilon},
          {"max_iters", cfg_.max_iters}};
}

}  // namespace mtbr
