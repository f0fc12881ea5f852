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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "mtbr/error.h"
#include "mtbr/kernels.h"
#include "mtbr/synth.h"
#include "mtbr/train.h"
#include "testing.h"

namespace mtbr {
namespace {

struct Setup {
  std::vector<LabeledSentence> data;
  MtbrModel model;
  std::vector<Example> examples;

  Setup(int n, std::uint64_t seed, int d = 8)
      : data(GenerateSyntheticCorpus({.sentences = n, .seed = seed})),
        model(testing::TinyHyper(d, seed), TokenIndex::Build(data)),
        examples(PrepareExamples(model, data)) {}
};

bool SameGradients(const Gradients &a, const Gradients &b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return false;
  }
  return true;
}

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  Setup s(64, 3);
  std::mt19937_64 rng(5);
  std::vector<double> draws;
  for (size_t i = 0; i < s.examples.size(); ++i) draws.push_back(UniformUnit(rng));
  for (const auto &nv : AblationVariants()) {
    for (Phase phase : {Phase::kBd, Phase::kNer}) {
      if (phase == Phase::kBd && nv.variant.disable_bd) continue;
      const auto ref = kernels::serial::AccumulateBatch(s.model, s.examples, phase,
                                                        nv.variant, draws);
      for (int threads : {1, 2, 3, 4}) {
        const auto par = kernels::parallel::AccumulateBatch(s.model, s.examples, phase,
                                                            nv.variant, draws, threads);
        CHECK(par.loss_sum == ref.loss_sum);
        CHECK(SameGradients(par.grads, ref.grads));
      }
    }
    std::vector<std::vector<int>> ids;
    for (const auto &ex : s.examples) ids.push_back(ex.ids);
    const auto ref = kernels::serial::PredictBatch(s.model, ids, nv.variant);
    for (int threads : {1, 2, 4}) {
      CHECK(kernels::parallel::PredictBatch(s.model, ids, nv.variant, threads) == ref);
    }
  }
}

TEST_CASE("batch gradient is the sum of per-sentence gradients") {
  Setup s(6, 4);
  const std::vector<double> draws(6, 0.1);
  const auto batch = kernels::serial::AccumulateBatch(s.model, s.examples, Phase::kNer,
                                                      Variant{}, draws);
  Gradients sum = s.model.params().MakeGradients();
  double loss = 0.0;
  for (const auto &ex : s.examples) {
    loss += s.model.NerLoss(ex, Variant{}, 0.1, &sum);
  }
  CHECK(batch.loss_sum == doctest::Approx(loss).epsilon(1e-12));
  for (size_t i = 0; i < sum.size(); ++i) {
    for (size_t k = 0; k < sum[i].size(); ++k) {
      CHECK(batch.grads[i][k] == doctest::Approx(sum[i][k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("phases alternate starting with boundary detection") {
  Setup s(20, 2);
  Trainer t(s.model, Variant{}, TrainConfig{.batch_size = 4});
  std::vector<Phase> seen;
  for (int i = 0; i < 5; ++i) {
    seen.push_back(t.next_phase());
    t.Step(std::span(s.examples).subspan(0, 4));
  }
  CHECK(seen == std::vector<Phase>{Phase::kBd, Phase::kNer, Phase::kBd, Phase::kNer, Phase::kBd});

  Setup s2(20, 2);
  Trainer no_bd(s2.model, VariantByName("no-bd").variant, TrainConfig{});
  for (int i = 0; i < 3; ++i) {
    CHECK(no_bd.next_phase() == Phase::kNer);
    no_bd.Step(std::span(s2.examples).subspan(0, 4));
  }
  const auto rep = no_bd.RunEpoch(s2.examples);
  CHECK(rep.bd_steps == 0);
  CHECK(rep.ner_steps == 2);
}

TEST_CASE("phase parameter sets") {
  Setup s(4, 1);
  const auto &m = s.model;
  auto names = [&](Phase p, const Variant &v, bool freeze) {
    std::vector<std::string> out;
    for (auto id : m.PhaseParameters(p, v, freeze)) out.push_back(m.params().name(id));
    std::sort(out.begin(), out.end());
    return out;
  };
  auto has = [](const std::vector<std::string> &v, const std::string &n) {
    return std::find(v.begin(), v.end(), n) != v.end();
  };
  const auto bd = names(Phase::kBd, Variant{}, false);
  CHECK(has(bd, "bd.start.w"));
  CHECK(has(bd, "span.w"));
  CHECK(has(bd, "enc.emb"));
  CHECK_FALSE(has(bd, "ner.w"));
  const auto ner = names(Phase::kNer, Variant{}, false);
  CHECK(has(ner, "ner.w"));
  CHECK(has(ner, "gate.w"));
  CHECK(has(ner, "span.w"));
  CHECK_FALSE(has(ner, "bd.start.w"));
  const auto frozen = names(Phase::kNer, Variant{}, true);
  CHECK_FALSE(has(frozen, "span.w"));
  CHECK_FALSE(has(frozen, "proj.bd.w"));
  CHECK_FALSE(has(names(Phase::kNer, VariantByName("no-gate").variant, false), "gate.w"));
  CHECK_FALSE(has(names(Phase::kNer, VariantByName("no-revision").variant, false), "span.w"));
}

TEST_CASE("freezing keeps boundary parameters fixed during ner steps") {
  Setup s(20, 6);
  auto &ps = s.model.params();
  std::vector<std::string> bd_names = {"proj.bd.w", "proj.bd.b", "bd.start.w", "bd.start.b",
                                       "bd.end.w", "bd.end.b", "span.w", "span.b"};
  TrainConfig cfg{.batch_size = 5};
  cfg.freeze_bd_in_ner = true;
  Trainer t(s.model, Variant{}, cfg);
  t.Step(std::span(s.examples).subspan(0, 5));  // bd step
  std::vector<Matrix> before;
  for (const auto &n : bd_names) before.push_back(ps.value(ps.Require(n)));
  const Matrix ner_before = ps.value(ps.Require("ner.w"));
  t.Step(std::span(s.examples).subspan(5, 5));  // ner step
  for (size_t i = 0; i < bd_names.size(); ++i) {
    CHECK_MESSAGE(ps.value(ps.Require(bd_names[i])) == before[i], bd_names[i]);
  }
  CHECK_FALSE(ps.value(ps.Require("ner.w")) == ner_before);
}

TEST_CASE("training is deterministic for any thread count") {
  auto run = [](int threads) {
    Setup s(40, 9);
    TrainConfig cfg{.epochs = 2, .batch_size = 8, .seed = 9, .threads = threads};
    Trainer t(s.model, Variant{}, cfg);
    auto reps = t.Fit(s.examples);
    std::vector<Matrix> values;
    for (size_t i = 0; i < s.model.params().size(); ++i) values.push_back(s.model.params().value(i));
    return std::make_pair(values, reps.back().ner_loss);
  };
  const auto a = run(1);
  CHECK(run(1) == a);
  CHECK(run(3) == a);
}

TEST_CASE("a small set can be overfit") {
  Setup s(20, 11, 16);
  TrainConfig cfg{.batch_size = 20, .seed = 11};
  cfg.optimizer.learning_rate = 2e-2;
  Trainer t(s.model, Variant{}, cfg);
  for (int i = 0; i < 200; ++i) t.Step(s.examples);
  double loss = 0.0;
  for (const auto &ex : s.examples) loss += s.model.NerLoss(ex, Variant{}, 0.0, nullptr);
  loss /= static_cast<double>(s.examples.size());
  INFO("mean ner loss ", loss);
  CHECK(loss < 0.1);
}

TEST_CASE("train config json") {
  TrainConfig c{.epochs = 3, .batch_size = 7, .seed = 4, .threads = 2};
  c.freeze_bd_in_ner = true;
  c.optimizer.kind = OptimizerKind::kSgd;
  const auto back = TrainConfig::FromJson(c.ToJson());
  CHECK(back.ToJson() == c.ToJson());
  CHECK_THROWS_AS(TrainConfig::FromJson({{"batch_size", 0}}), Error);
  CHECK_THROWS_AS(TrainConfig::FromJson({{"optimizer", {{"kind", "rmsprop"}}}}), Error);
}

}  // namespace
}  // namespace mtbr
