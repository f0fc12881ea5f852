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

#include "mtbr/train.h"

#include <cmath>

#include "mtbr/error.h"
#include "mtbr/kernels.h"

namespace mtbr {

nlohmann::json TrainConfig::ToJson() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"seed", seed},
          {"threads", threads},
          {"freeze_bd_in_ner", freeze_bd_in_ner},
          {"optimizer",
           {{"kind", optimizer.kind == OptimizerKind::kAdam ? "adam" : "sgd"},
            {"learning_rate", optimizer.learning_rate},
            {"weight_decay", optimizer.weight_decay},
            {"beta1", optimizer.beta1},
            {"beta2", optimizer.beta2},
            {"epsilon", optimizer.epsilon}}}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json &j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.freeze_bd_in_ner = j.value("freeze_bd_in_ner", c.freeze_bd_in_ner);
  if (j.contains("optimizer")) {
    const auto &o = j.at("optimizer");
    const auto kind = o.value("kind", std::string("adam"));
    if (kind == "adam") {
      c.optimizer.kind = OptimizerKind::kAdam;
    } else if (kind == "sgd") {
      c.optimizer.kind = OptimizerKind::kSgd;
    } else {
      throw Error(ErrorCode::kBadConfig, "optimizer kind must be adam or sgd");
    }
    c.optimizer.learning_rate = o.value("learning_rate", c.optimizer.learning_rate);
    c.optimizer.weight_decay = o.value("weight_decay", c.optimizer.weight_decay);
    c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
    c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
    c.optimizer.epsilon = o.value("epsilon", c.optimizer.epsilon);
  }
  if (c.epochs < 0 || c.batch_size < 1) {
    throw Error(ErrorCode::kBadConfig, "epochs >= 0 and batch_size >= 1");
  }
  return c;
}

Trainer::Trainer(MtbrModel &model, Variant variant, TrainConfig cfg)
    : model_(model),
      variant_(variant),
      cfg_(cfg),
      optimizer_(cfg.optimizer),
      rng_(cfg.seed) {
  if (variant_.disable_bd) next_ = Phase::kNer;
}

double Trainer::Step(std::span<const Example> batch) {
  if (batch.empty()) return 0.0;
  const Phase phase = next_;
  std::vector<double> draws;
  if (phase == Phase::kNer) {
    draws.reserve(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) draws.push_back(UniformUnit(rng_));
  }
  auto result = kernels::AccumulateBatch(model_, batch, phase, variant_, draws,
                                         cfg_.threads);
  const double inv = 1.0 / static_cast<double>(batch.size());
  auto &store = model_.params();
  store.ZeroGrads();
  AddGradients(store.grads(), result.grads, inv);
  const double loss = result.loss_sum * inv;
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kNonFiniteLoss, "training loss diverged");
  }
  optimizer_.Step(store, model_.PhaseParameters(phase, variant_,
                                                cfg_.freeze_bd_in_ner));
  if (!variant_.disable_bd) {
    next_ = phase == Phase::kBd ? Phase::kNer : Phase::kBd;
  }
  return loss;
}

EpochReport Trainer::RunEpoch(std::span<const Example> data) {
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng_() % i]);
  }
  EpochReport rep;
  rep.epoch = ++epoch_;
  std::vector<Example> batch;
  const size_t bs = static_cast<size_t>(cfg_.batch_size);
  for (size_t b = 0; b < order.size(); b += bs) {
    batch.clear();
    for (size_t k = b; k < std::min(order.size(), b + bs); ++k) {
      batch.push_back(data[order[k]]);
    }
    const Phase phase = next_;
    const double loss = Step(batch);
    if (phase == Phase::kBd) {
      rep.bd_loss += loss;
      ++rep.bd_steps;
    } else {
      rep.ner_loss += loss;
      ++rep.ner_steps;
    }
  }
  if (rep.bd_steps) rep.bd_loss /= rep.bd_steps;
  if (rep.ner_steps) rep.ner_loss /= rep.ner_steps;
  return rep;
}

std::vector<EpochReport> Trainer::Fit(
    std::span<const Example> data,
    const std::function<void(const EpochReport &)> &on_epoch) {
  std::vector<EpochReport> reports;
  for (int e = 0; e < cfg_.epochs; ++e) {
    reports.push_back(RunEpoch(data));
    if (on_epoch) on_epoch(reports.back());
  }
  return reports;
}

std::vector<Example> PrepareExamples(const MtbrModel &model,
                                     std::span<const LabeledSentence> data) {
  std::vector<Example> out;
  out.reserve(data.size());
  for (const auto &s : data) out.push_back(model.Prepare(s));
  return out;
}

}  // namespace mtbr
