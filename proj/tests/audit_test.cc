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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "audit_model.h"
#include "doctest.h"
#include "mtbr/audit.h"
#include "mtbr/error.h"
#include "mtbr/loop.h"
#include "mtbr/synth.h"
#include "testing.h"

namespace mtbr {
namespace {

using testing::FreshAuditItem;

const TagSequence kA = {kBPer, kO, kBLoc};
const TagSequence kB = {kBPer, kO, kO};
const TagSequence kC = {kO, kO, kBLoc};

ErrorCode CodeOf(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

TEST_CASE("decision protocol examples") {
  SUBCASE("two identical decisions resolve") {
    auto item = FreshAuditItem();
    ApplyDecision(item, "a", kA, "t");
    CHECK(item.status == AuditStatus::kOneDecision);
    ApplyDecision(item, "b", kA, "t");
    CHECK(item.status == AuditStatus::kResolved);
    CHECK(item.resolution == kA);
    CHECK(CodeOf([&] { ApplyDecision(item, "c", kA, "t"); }) == ErrorCode::kAlreadyResolved);
  }
  SUBCASE("majority after a conflict") {
    auto item = FreshAuditItem();
    ApplyDecision(item, "a", kA, "t");
    ApplyDecision(item, "b", kB, "t");
    CHECK(item.status == AuditStatus::kConflicted);
    CHECK_FALSE(item.escalated);
    ApplyDecision(item, "c", kA, "t");
    CHECK(item.status == AuditStatus::kResolved);
    CHECK(item.resolution == kA);
    CHECK(item.decisions.size() == 3);
  }
  SUBCASE("three different answers escalate") {
    auto item = FreshAuditItem();
    ApplyDecision(item, "a", kA, "t");
    ApplyDecision(item, "b", kB, "t");
    ApplyDecision(item, "c", kC, "t");
    CHECK(item.status == AuditStatus::kConflicted);
    CHECK(item.escalated);
    ApplyOverride(item, "lead", kC, "t");
    CHECK(item.status == AuditStatus::kResolved);
    CHECK(item.resolution == kC);
    CHECK(item.decisions.back().is_override);
  }
  SUBCASE("rejections") {
    auto item = FreshAuditItem();
    ApplyDecision(item, "a", kA, "t");
    const auto before = item;
    CHECK(CodeOf([&] { ApplyDecision(item, "a", kB, "t"); }) == ErrorCode::kDuplicateAuditor);
    CHECK(CodeOf([&] { ApplyDecision(item, "b", {kIPer, kO, kO}, "t"); }) ==
          ErrorCode::kInvalidTags);
    CHECK(CodeOf([&] { ApplyDecision(item, "b", {kO, kO}, "t"); }) == ErrorCode::kInvalidTags);
    CHECK(CodeOf([&] { ApplyDecision(item, "", kA, "t"); }) == ErrorCode::kInvalidTags);
    CHECK(CodeOf([&] { ApplyOverride(item, "lead", kA, "t"); }) == ErrorCode::kPrecondition);
    CHECK(item == before);
  }
}

TEST_CASE("state machine against the reference over all short sequences") {
  const auto res = testing::CheckAuditSequences(testing::FullAuditAlphabet(), 5);
  INFO(res.first_violation);
  CHECK(res.violations == 0);
  CHECK(res.sequences > 800000);
}

TEST_CASE("store replay reconstructs every short sequence") {
  const auto path = (testing::ScratchDir() / ("mtbr-replay-" + std::to_string(::getpid()))).string();
  const auto res = testing::CheckAuditReplay(testing::ReplayAuditAlphabet(), 4, path);
  std::filesystem::remove(path);
  INFO(res.first_violation);
  CHECK(res.violations == 0);
  CHECK(res.sequences == 1 + 6 + 36 + 216 + 1296);
}

TEST_CASE("item json round trip") {
  auto item = FreshAuditItem();
  item.item_id = 4;
  item.iteration = 2;
  ApplyDecision(item, "a", kA, "2026-01-01T00:00:00Z");
  ApplyDecision(item, "b", kB, "2026-01-01T00:00:01Z");
  CHECK(AuditItem::FromJson(item.ToJson()) == item);
  const auto summary = item.SummaryJson();
  CHECK(summary["item_id"] == 4);
  CHECK(summary["status"] == "conflicted");
  CHECK(item.ToJson()["stored_tags"] == nlohmann::json{"B-PER", "O", "O"});
  CHECK(CodeOf([] { TagsFromJson({"B-PER", "B-XYZ"}); }) == ErrorCode::kInvalidTags);
  for (auto s : {AuditStatus::kPending, AuditStatus::kOneDecision, AuditStatus::kConflicted,
                 AuditStatus::kResolved}) {
    CHECK(ParseAuditStatus(AuditStatusName(s)) == s);
  }
  CHECK_FALSE(ParseAuditStatus("done"));
}

std::vector<LabeledSentence> TenSentences() {
  std::vector<LabeledSentence> data;
  for (int i = 0; i < 10; ++i) {
    auto s = testing::Sentence({"Ali", "ke", "Ipoh"}, {"B-PER", "O", "B-LOC"});
    s.id = "s" + std::to_string(i);
    data.push_back(s);
  }
  return data;
}

TEST_CASE("prediction summary") {
  auto data = TenSentences();
  std::vector<TagSequence> pred(10, kA);
  pred[3] = kB;
  pred[7] = kC;
  data[5].provenance = Provenance::kAudited;
  const auto r = SummarizePredictions(data, pred, 3);
  CHECK(r.disagreement_count == 2);
  CHECK(r.disagreement_rate == 0.2);
  CHECK(r.audited_count == 1);
  CHECK(r.dataset_size == 10);
  CHECK(r.iteration == 3);
  CHECK(IterationReport::FromJson(r.ToJson()) == r);
  CHECK(CodeOf([&] { SummarizePredictions({}, {}, 1); }) == ErrorCode::kTooFewSentences);
}

TEST_CASE("conflict detection and re-entry") {
  auto data = TenSentences();
  std::vector<TagSequence> pred(10, kA);
  CHECK(FindConflicts(data, pred, {}, 1).empty());

  pred[1] = pred[4] = pred[9] = kB;
  auto items = FindConflicts(data, pred, {}, 1);
  REQUIRE(items.size() == 3);
  for (const auto &it : items) {
    CHECK(it.status == AuditStatus::kPending);
    CHECK(it.stored_tags == kA);
    CHECK(it.predicted_tags == kB);
    CHECK(it.iteration == 1);
  }
  CHECK(items[1].sentence_id == "s4");

  // Open items block new ones.
  CHECK(FindConflicts(data, pred, items, 2).empty());

  // Resolved in favour of the prediction, merged: the model now agrees.
  AuditStore store;
  items = store.Enqueue(items);
  store.RecordDecision(items[0].item_id, "a", kB);
  store.RecordDecision(items[0].item_id, "b", kB);
  // Resolved against the prediction: the same prediction stays settled.
  store.RecordDecision(items[1].item_id, "a", kA);
  store.RecordDecision(items[1].item_id, "b", kA);
  store.RecordDecision(items[2].item_id, "a", kA);
  store.RecordDecision(items[2].item_id, "b", kA);
  auto merged = MergeResolved(data, store.Resolved());
  CHECK(merged[1].ner_tags == kB);
  CHECK(merged[4].ner_tags == kA);
  CHECK(FindConflicts(merged, pred, store.Items(), 2).empty());

  // A different disagreement on a resolved sentence re-enters.
  pred[4] = kC;
  auto again = FindConflicts(merged, pred, store.Items(), 2);
  REQUIRE(again.size() == 1);
  CHECK(again[0].sentence_id == "s4");
  CHECK(again[0].predicted_tags == kC);
}

TEST_CASE("merging resolutions") {
  auto data = TenSentences();
  CHECK(MergeResolved(data, {}) == data);

  AuditStore store;
  auto item = FreshAuditItem();
  item.sentence_id = "s2";
  item.tokens = data[2].tokens;
  auto queued = store.Enqueue({item, item});
  store.RecordDecision(queued[0].item_id, "a", kB);
  store.RecordDecision(queued[0].item_id, "b", kB);
  auto once = MergeResolved(data, store.Resolved());
  int changed = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    changed += once[i].ner_tags != data[i].ner_tags;
    CHECK(once[i].tokens == data[i].tokens);
  }
  CHECK(changed == 1);
  CHECK(once[2].ner_tags == kB);
  CHECK(once[2].provenance == Provenance::kAudited);
  CHECK(MergeResolved(once, store.Resolved()) == once);

  // The later item wins.
  store.RecordDecision(queued[1].item_id, "a", kC);
  store.RecordDecision(queued[1].item_id, "b", kC);
  CHECK(MergeResolved(data, store.Resolved())[2].ner_tags == kC);

  // A resolution for different tokens is ignored.
  auto other = FreshAuditItem();
  other.sentence_id = "s3";
  other.tokens = {"x", "y", "z"};
  auto q = store.Enqueue({other});
  store.RecordDecision(q[0].item_id, "a", kB);
  store.RecordDecision(q[0].item_id, "b", kB);
  CHECK(MergeResolved(data, store.Resolved())[3] == data[3]);
}

TEST_CASE("convergence rule") {
  IterationReport r;
  r.iteration = 1;
  r.disagreement_rate = 0.0;
  CHECK(CheckConvergence(std::vector{r}, 1e-9, 10));
  r.iteration = 2;
  r.disagreement_rate = 0.05;
  CHECK_FALSE(CheckConvergence(std::vector{r}, 0.01, 10));
  r.iteration = 10;
  CHECK(CheckConvergence(std::vector{r}, 0.01, 10));
  r.iteration = 3;
  r.disagreement_rate = 0.01;
  CHECK_FALSE(CheckConvergence(std::vector{r}, 0.01, 10));
  CHECK(CodeOf([] { CheckConvergence({}, 0.01, 10); }) == ErrorCode::kPrecondition);
}

TEST_CASE("store persistence and errors") {
  testing::TempDir dir;
  const auto path = dir.File("audit.jsonl");
  nlohmann::json snap;
  {
    AuditStore store(path);
    auto q = store.Enqueue({FreshAuditItem(), FreshAuditItem()});
    CHECK(q[0].item_id == 1);
    CHECK(q[1].item_id == 2);
    auto it = store.RecordDecision(1, "a", kA, 0);
    CHECK(it.version == 1);
    CHECK(CodeOf([&] { store.RecordDecision(1, "b", kA, 0); }) == ErrorCode::kStaleVersion);
    CHECK(CodeOf([&] { store.RecordDecision(9, "b", kA); }) == ErrorCode::kNotFound);
    const auto before = store.Snapshot();
    const auto size_before = std::filesystem::file_size(path);
    CHECK(CodeOf([&] { store.RecordDecision(1, "b", {kIPer, kO, kO}); }) ==
          ErrorCode::kInvalidTags);
    CHECK(store.Snapshot() == before);
    CHECK(std::filesystem::file_size(path) == size_before);
    IterationReport r;
    r.iteration = 1;
    store.AppendReport(r);
    CHECK(store.ItemsWithStatus(AuditStatus::kPending).size() == 1);
    snap = store.Snapshot();
  }
  {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    const auto h = nlohmann::json::parse(header);
    CHECK(h["schema"] == "mtbr-audit-log");
    CHECK(h["version"] == 1);
  }
  // A torn final record is dropped and later appends stay readable.
  { std::ofstream(path, std::ios::app) << R"({"op":"decision","item_id":2,)"; }
  {
    AuditStore store(path);
    CHECK(store.Snapshot() == snap);
    store.RecordDecision(2, "a", kB);
  }
  {
    AuditStore store(path);
    CHECK(store.Item(2)->status == AuditStatus::kOneDecision);
    CHECK(store.Reports().size() == 1);
  }
  std::ofstream(dir.File("bad.jsonl")) << R"({"schema":"other","version":1})" << "\n";
  CHECK(CodeOf([&] { AuditStore s(dir.File("bad.jsonl")); }) == ErrorCode::kIo);
}

LoopConfig TinyLoop() {
  LoopConfig cfg;
  cfg.experiment.hyper = testing::TinyHyper();
  cfg.experiment.train.epochs = 2;
  cfg.max_iters = 3;
  return cfg;
}

TEST_CASE("iteration on an empty dataset fails") {
  CHECK(CodeOf([] { RunIteration({}, {}, TinyLoop(), 1); }) == ErrorCode::kTooFewSentences);
}

TEST_CASE("a memorized dataset has no disagreements") {
  auto data = TenSentences();
  auto cfg = TinyLoop();
  cfg.experiment.train.epochs = 60;
  cfg.experiment.train.batch_size = 5;
  cfg.experiment.train.optimizer.learning_rate = 2e-2;
  const auto out = RunIteration(data, {}, cfg, 1);
  CHECK(out.report.disagreement_count == 0);
  CHECK(CheckConvergence(std::vector{out.report}, cfg.epsilon, cfg.max_iters));
}

TEST_CASE("audit loop over files") {
  testing::TempDir dir;
  auto data = GenerateSyntheticCorpus({.sentences = 30, .seed = 5});
  WriteBio2File(dir.File("data.bio2"), data);
  AuditStore store(dir.File("audit.jsonl"));
  AuditLoop loop(dir.File("data.bio2"), std::nullopt, store, TinyLoop());
  auto first = loop.Iterate();
  CHECK(first.report.iteration == 1);
  CHECK(first.report.dataset_size == 30);
  CHECK(static_cast<std::int64_t>(first.enqueued.size()) == first.report.disagreement_count);
  CHECK(first.report.disagreement_count > 0);
  CHECK(store.Reports().size() == 1);
  CHECK(loop.Progress()["iterations"].size() == 1);

  const auto item = first.enqueued.front();
  store.RecordDecision(item.item_id, "a", item.predicted_tags);
  store.RecordDecision(item.item_id, "b", item.predicted_tags);
  auto second = loop.Iterate();
  CHECK(second.report.iteration == 2);
  CHECK(second.report.audited_count == 1);
  const auto merged = ReadBio2File(dir.File("data.bio2"));
  for (const auto &s : merged) {
    if (s.id == item.sentence_id) CHECK(s.ner_tags == item.predicted_tags);
  }
  loop.Iterate();
  CHECK(loop.Converged());
}

}  // namespace
}  // namespace mtbr
