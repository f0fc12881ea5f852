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

#include "mtbr/eval.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "mtbr/error.h"
#include "mtbr/kernels.h"
#include "mtbr/tagset.h"

namespace mtbr {

namespace {

double SafeDiv(double a, double b) { return b > 0.0 ? a / b : 0.0; }

double F1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

void CheckAligned(size_t a, size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kShapeMismatch,
                "gold and predicted sentence counts differ");
  }
}

}  // namespace

double PrfCounts::precision() const { return SafeDiv(tp, tp + fp); }
double PrfCounts::recall() const { return SafeDiv(tp, tp + fn); }
double PrfCounts::f1() const { return F1(precision(), recall()); }

nlohmann::json Prf::ToJson() const {
  nlohmann::json per = nlohmann::json::object();
  for (int t = 0; t < kNumEntityTypes; ++t) {
    const auto &c = per_type[t];
    per[std::string(kSpanTagNames[t])] = {{"precision", c.precision()},
                                          {"recall", c.recall()},
                                          {"f1", c.f1()},
                                          {"tp", c.tp},
                                          {"fp", c.fp},
                                          {"fn", c.fn}};
  }
  return {{"precision", precision}, {"recall", recall}, {"f1", f1},
          {"tp", tp},               {"fp", fp},         {"fn", fn},
          {"per_type", per}};
}

Prf EntityPrf(std::span<const std::vector<EntitySpan>> gold,
              std::span<const std::vector<EntitySpan>> pred) {
  CheckAligned(gold.size(), pred.size());
  Prf out;
  for (size_t s = 0; s < gold.size(); ++s) {
    // Multiset intersection: each gold span absorbs at most one prediction.
    std::map<EntitySpan, int> remaining;
    for (const auto &g : gold[s]) ++remaining[g];
    for (const auto &p : pred[s]) {
      auto it = remaining.find(p);
      if (it != remaining.end() && it->second > 0) {
        --it->second;
        ++out.tp;
        ++out.per_type[p.type].tp;
      } else {
        ++out.fp;
        ++out.per_type[p.type].fp;
      }
    }
    for (const auto &[span, left] : remaining) {
      out.fn += left;
      out.per_type[span.type].fn += left;
    }
  }
  out.precision = SafeDiv(out.tp, out.tp + out.fp);
  out.recall = SafeDiv(out.tp, out.tp + out.fn);
  out.f1 = F1(out.precision, out.recall);
  return out;
}

nlohmann::json BreReport::ToJson() const {
  return {{"predicted", predicted_count},
          {"boundary_errors", boundary_error_count},
          {"bre_ratio", bre_ratio}};
}

BreReport BreRatio(std::span<const std::vector<EntitySpan>> gold,
                   std::span<const std::vector<EntitySpan>> pred) {
  CheckAligned(gold.size(), pred.size());
  BreReport r;
  for (size_t s = 0; s < gold.size(); ++s) {
    for (const auto &p : pred[s]) {
      ++r.predicted_count;
      bool overlaps = false;
      bool exact = false;
      for (const auto &g : gold[s]) {
        if (g.type != p.type) continue;
        if (g.start == p.start && g.end == p.end) exact = true;
        if (p.start <= g.end && g.start <= p.end) overlaps = true;
      }
      if (overlaps && !exact) ++r.boundary_error_count;
    }
  }
  r.bre_ratio = SafeDiv(r.boundary_error_count, r.predicted_count);
  return r;
}

double TokenAccuracy(std::span<const TagSequence> gold,
                     std::span<const TagSequence> pred) {
  CheckAligned(gold.size(), pred.size());
  std::int64_t total = 0, correct = 0;
  for (size_t s = 0; s < gold.size(); ++s) {
    CheckAligned(gold[s].size(), pred[s].size());
    for (size_t t = 0; t < gold[s].size(); ++t) {
      ++total;
      correct += gold[s][t] == pred[s][t];
    }
  }
  return SafeDiv(correct, total);
}

nlohmann::json EvalResult::ToJson() const {
  return {{"prf", prf.ToJson()},
          {"bre", bre.ToJson()},
          {"token_accuracy", token_accuracy}};
}

EvalResult EvaluateModel(const MtbrModel &model,
                         std::span<const LabeledSentence> data,
                         const Variant &variant, int threads) {
  std::vector<std::vector<int>> ids;
  ids.reserve(data.size());
  for (const auto &s : data) ids.push_back(model.Ids(s.tokens));
  EvalResult res;
  res.predictions = kernels::PredictBatch(model, ids, variant, threads);
  SpanLists gold, pred;
  std::vector<TagSequence> gold_tags;
  for (size_t s = 0; s < data.size(); ++s) {
    gold.push_back(ExtractEntities(data[s].ner_tags));
    pred.push_back(ExtractEntities(res.predictions[s]));
    gold_tags.push_back(data[s].ner_tags);
  }
  res.prf = EntityPrf(gold, pred);
  res.bre = BreRatio(gold, pred);
  res.token_accuracy = TokenAccuracy(gold_tags, res.predictions);
  return res;
}

ExperimentResult TrainAndEvaluate(std::span<const LabeledSentence> train,
                                  std::span<const LabeledSentence> test,
                                  const ExperimentConfig &cfg,
                                  const Variant &variant) {
  MtbrModel model(cfg.hyper, TokenIndex::Build(train));
  auto examples = PrepareExamples(model, train);
  Trainer trainer(model, variant, cfg.train);
  ExperimentResult out;
  out.epochs = trainer.Fit(examples);
  out.eval = EvaluateModel(model, test, variant, cfg.train.threads);
  return out;
}

std::vector<AblationRow> AblationRun(
    const DatasetSplit &split, const ExperimentConfig &base,
    std::span<const std::uint64_t> seeds,
    std::span<const NamedVariant> variants,
    const std::function<void(const std::string &, std::uint64_t,
                             const EvalResult &)> &on_run) {
  std::vector<AblationRow> rows;
  for (const auto &nv : variants) {
    AblationRow row;
    row.variant = nv.name;
    try {
      for (auto seed : seeds) {
        ExperimentConfig cfg = base;
        cfg.hyper.seed = seed;
        cfg.train.seed = seed;
        auto res = TrainAndEvaluate(split.train, split.test, cfg, nv.variant);
        row.precision += res.eval.prf.precision;
        row.recall += res.eval.prf.recall;
        row.f1 += res.eval.prf.f1;
        row.bre += res.eval.bre.bre_ratio;
        row.f1_per_seed.push_back(res.eval.prf.f1);
        row.bre_per_seed.push_back(res.eval.bre.bre_ratio);
        ++row.runs;
        if (on_run) on_run(nv.name, seed, res.eval);
      }
    } catch (const std::exception &e) {
      row.error = e.what();
    }
    if (row.runs > 0) {
      row.precision /= row.runs;
      row.recall /= row.runs;
      row.f1 /= row.runs;
      row.bre /= row.runs;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string FormatAblationTable(std::span<const AblationRow> rows) {
  std::ostringstream os;
  os << "variant\truns\tP\tR\tF1\tBRE\terror\n";
  char buf[128];
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof(buf), "%d\t%.4f\t%.4f\t%.4f\t%.4f", r.runs,
                  r.precision, r.recall, r.f1, r.bre);
    os << r.variant << '\t' << buf << '\t' << r.error << '\n';
  }
  return os.str();
}

nlohmann::json AblationToJson(std::span<const AblationRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto &r : rows) {
    out.push_back({{"variant", r.variant},
                   {"runs", r.runs},
                   {"precision", r.precision},
                   {"recall", r.recall},
                   {"f1", r.f1},
                   {"bre", r.bre},
                   {"f1_per_seed", r.f1_per_seed},
                   {"bre_per_seed", r.bre_per_seed},
                   {"error", r.error}});
  }
  return out;
}

}  // namespace mtbr
