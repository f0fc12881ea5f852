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

#include "mtbr/audit.h"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>

#include <spdlog/spdlog.h>

#include "mtbr/error.h"
#include "mtbr/tagset.h"

namespace mtbr {

std::string_view AuditStatusName(AuditStatus s) {
  switch (s) {
    case AuditStatus::kPending: return "pending";
    case AuditStatus::kOneDecision: return "one_decision";
    case AuditStatus::kConflicted: return "conflicted";
    case AuditStatus::kResolved: return "resolved";
  }
  return "pending";
}

std::optional<AuditStatus> ParseAuditStatus(std::string_view name) {
  for (auto s : {AuditStatus::kPending, AuditStatus::kOneDecision,
                 AuditStatus::kConflicted, AuditStatus::kResolved}) {
    if (AuditStatusName(s) == name) return s;
  }
  return std::nullopt;
}

TagSequence TagsFromJson(const nlohmann::json &j) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidTags, "tags must be a list");
  TagSequence tags;
  for (const auto &t : j) {
    if (!t.is_string()) {
      throw Error(ErrorCode::kInvalidTags, "tags must be label names");
    }
    auto label = ParseNerLabel(t.get<std::string>());
    if (!label) {
      throw Error(ErrorCode::kInvalidTags,
                  "unknown label '" + t.get<std::string>() + "'");
    }
    tags.push_back(*label);
  }
  return tags;
}

nlohmann::json TagsToJson(const TagSequence &tags) {
  nlohmann::json out = nlohmann::json::array();
  for (int t : tags) out.push_back(std::string(kNerLabelNames[t]));
  return out;
}

int AuditItem::DisagreementCount() const {
  int n = 0;
  for (size_t i = 0; i < stored_tags.size() && i < predicted_tags.size(); ++i) {
    n += stored_tags[i] != predicted_tags[i];
  }
  return n;
}

nlohmann::json AuditItem::ToJson() const {
  nlohmann::json decs = nlohmann::json::array();
  for (const auto &d : decisions) {
    decs.push_back({{"auditor_id", d.auditor_id},
                    {"tags", TagsToJson(d.tags)},
                    {"timestamp", d.timestamp},
                    {"override", d.is_override}});
  }
  return {{"item_id", item_id},
          {"sentence_id", sentence_id},
          {"tokens", tokens},
          {"stored_tags", TagsToJson(stored_tags)},
          {"predicted_tags", TagsToJson(predicted_tags)},
          {"iteration", iteration},
          {"status", std::string(AuditStatusName(status))},
          {"decisions", decs},
          {"resolution", resolution ? TagsToJson(*resolution) : nlohmann::json()},
          {"escalated", escalated},
          {"version", version}};
}

nlohmann::json AuditItem::SummaryJson() const {
  std::string preview;
  for (size_t i = 0; i < tokens.size() && i < 12; ++i) {
    if (i) preview += ' ';
    preview += tokens[i];
  }
  if (tokens.size() > 12) preview += " ...";
  return {{"item_id", item_id},
          {"sentence_id", sentence_id},
          {"preview", preview},
          {"disagreements", DisagreementCount()},
          {"status", std::string(AuditStatusName(status))},
          {"decision_count", decisions.size()},
          {"escalated", escalated},
          {"version", version}};
}

AuditItem AuditItem::FromJson(const nlohmann::json &j) {
  AuditItem it;
  it.item_id = j.at("item_id").get<std::int64_t>();
  it.sentence_id = j.at("sentence_id").get<std::string>();
  it.tokens = j.at("tokens").get<std::vector<std::string>>();
  it.stored_tags = TagsFromJson(j.at("stored_tags"));
  it.predicted_tags = TagsFromJson(j.at("predicted_tags"));
  it.iteration = j.value("iteration", 0);
  auto st = ParseAuditStatus(j.value("status", std::string("pending")));
  if (!st) throw Error(ErrorCode::kBadConfig, "bad audit status");
  it.status = *st;
  for (const auto &d : j.value("decisions", nlohmann::json::array())) {
    it.decisions.push_back({d.at("auditor_id").get<std::string>(),
                            TagsFromJson(d.at("tags")),
                            d.value("timestamp", std::string()),
                            d.value("override", false)});
  }
  if (j.contains("resolution") && !j.at("resolution").is_null()) {
    it.resolution = TagsFromJson(j.at("resolution"));
  }
  it.escalated = j.value("escalated", false);
  it.version = j.value("version", std::int64_t{0});
  return it;
}

namespace {

void CheckTags(const AuditItem &item, const TagSequence &tags) {
  if (tags.size() != item.tokens.size()) {
    throw Error(ErrorCode::kInvalidTags,
                "expected " + std::to_string(item.tokens.size()) +
                    " tags, got " + std::to_string(tags.size()));
  }
  if (!IsValidBio2(tags)) {
    throw Error(ErrorCode::kInvalidTags, "not a valid BIO2 sequence");
  }
}

}  // namespace

void ApplyDecision(AuditItem &item, const std::string &auditor_id,
                   const TagSequence &tags, const std::string &timestamp) {
  if (item.status == AuditStatus::kResolved) {
    throw Error(ErrorCode::kAlreadyResolved,
                "item " + std::to_string(item.item_id));
  }
  if (auditor_id.empty()) {
    throw Error(ErrorCode::kInvalidTags, "auditor_id is required");
  }
  CheckTags(item, tags);
  for (const auto &d : item.decisions) {
    if (d.auditor_id == auditor_id) {
      throw Error(ErrorCode::kDuplicateAuditor,
                  auditor_id + " already decided item " +
                      std::to_string(item.item_id));
    }
  }
  const bool agrees_with_earlier =
      std::any_of(item.decisions.begin(), item.decisions.end(),
                  [&](const AuditDecision &d) { return d.tags == tags; });
  item.decisions.push_back({auditor_id, tags, timestamp, false});
  ++item.version;
  if (item.decisions.size() == 1) {
    item.status = AuditStatus::kOneDecision;
  } else if (agrees_with_earlier) {
    item.status = AuditStatus::kResolved;
    item.resolution = tags;
    item.escalated = false;
  } else if (item.decisions.size() == 2) {
    item.status = AuditStatus::kConflicted;
  } else {
    item.status = AuditStatus::kConflicted;
    item.escalated = true;
  }
}

void ApplyOverride(AuditItem &item, const std::string &auditor_id,
                   const TagSequence &tags, const std::string &timestamp) {
  if (item.status == AuditStatus::kResolved) {
    throw Error(ErrorCode::kAlreadyResolved,
                "item " + std::to_string(item.item_id));
  }
  if (item.status != AuditStatus::kConflicted) {
    throw Error(ErrorCode::kPrecondition,
                "only conflicted items can be overridden");
  }
  if (auditor_id.empty()) {
    throw Error(ErrorCode::kInvalidTags, "auditor_id is required");
  }
  CheckTags(item, tags);
  item.decisions.push_back({auditor_id, tags, timestamp, true});
  ++item.version;
  item.status = AuditStatus::kResolved;
  item.resolution = tags;
  item.escalated = false;
}

nlohmann::json IterationReport::ToJson() const {
  return {{"iteration", iteration},
          {"dev_metrics", dev_metrics},
          {"dataset_size", dataset_size},
          {"disagreement_count", disagreement_count},
          {"disagreement_rate", disagreement_rate},
          {"audited_count", audited_count},
          {"converged", converged}};
}

IterationReport IterationReport::FromJson(const nlohmann::json &j) {
  IterationReport r;
  r.iteration = j.at("iteration").get<int>();
  r.dev_metrics = j.value("dev_metrics", nlohmann::json::object());
  r.dataset_size = j.value("dataset_size", std::int64_t{0});
  r.disagreement_count = j.value("disagreement_count", std::int64_t{0});
  r.disagreement_rate = j.value("disagreement_rate", 0.0);
  r.audited_count = j.value("audited_count", std::int64_t{0});
  r.converged = j.value("converged", false);
  return r;
}

bool CheckConvergence(std::span<const IterationReport> history,
                      double epsilon, int max_iters) {
  if (history.empty()) {
    throw Error(ErrorCode::kPrecondition, "no iteration reports");
  }
  const auto &last = history.back();
  if (last.disagreement_rate < epsilon) return true;
  if (last.iteration >= max_iters) {
    spdlog::warn("stopping at iteration cap {} with disagreement rate {:.4f}",
                 max_iters, last.disagreement_rate);
    return true;
  }
  return false;
}

std::vector<AuditItem> FindConflicts(std::span<const LabeledSentence> dataset,
                                     std::span<const TagSequence> predictions,
                                     std::span<const AuditItem> existing,
                                     int iteration) {
  if (dataset.size() != predictions.size()) {
    throw Error(ErrorCode::kShapeMismatch, "predictions not aligned");
  }
  std::multimap<std::string, const AuditItem *> by_sentence;
  for (const auto &it : existing) by_sentence.emplace(it.sentence_id, &it);

  std::vector<AuditItem> out;
  for (size_t s = 0; s < dataset.size(); ++s) {
    const auto &sent = dataset[s];
    const auto &pred = predictions[s];
    if (pred == sent.ner_tags) continue;
    bool skip = false;
    auto [lo, hi] = by_sentence.equal_range(sent.id);
    for (auto it = lo; it != hi && !skip; ++it) {
      const AuditItem &prev = *it->second;
      if (prev.status != AuditStatus::kResolved) {
        skip = true;
      } else if (prev.resolution == pred || prev.predicted_tags == pred) {
        skip = true;
      }
    }
    if (skip) continue;
    AuditItem item;
    item.sentence_id = sent.id;
    item.tokens = sent.tokens;
    item.stored_tags = sent.ner_tags;
    item.predicted_tags = pred;
    item.iteration = iteration;
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<LabeledSentence> MergeResolved(
    std::span<const LabeledSentence> dataset,
    std::span<const AuditItem> resolved) {
  std::map<std::string, const AuditItem *> latest;
  for (const auto &it : resolved) {
    if (it.status != AuditStatus::kResolved || !it.resolution) continue;
    auto &slot = latest[it.sentence_id];
    if (!slot || slot->item_id < it.item_id) slot = &it;
  }
  std::vector<LabeledSentence> out(dataset.begin(), dataset.end());
  for (auto &s : out) {
    auto found = latest.find(s.id);
    if (found == latest.end()) continue;
    const AuditItem &it = *found->second;
    if (it.tokens != s.tokens) {
      spdlog::warn("resolution for {} ignored: token sequence changed", s.id);
      continue;
    }
    s.ner_tags = *it.resolution;
    s.provenance = Provenance::kAudited;
  }
  return out;
}

std::string NowTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AuditStore::AuditStore() = default;

AuditStore::AuditStore(const std::string &path) : path_(path) {
  size_t valid = 0;
  if (std::filesystem::exists(path)) {
    valid = Replay(path);
    std::error_code ec;
    if (valid != std::filesystem::file_size(path, ec)) {
      std::filesystem::resize_file(path, valid, ec);
      if (ec) throw Error(ErrorCode::kIo, "cannot truncate audit store " + path);
    }
  }
  file_ = std::fopen(path.c_str(), "ab");
  if (!file_) throw Error(ErrorCode::kIo, "cannot open audit store " + path);
  if (valid == 0) {
    Append({{"schema", kSchema}, {"version", kSchemaVersion}});
  }
}

AuditStore::~AuditStore() {
  if (file_) std::fclose(file_);
}

void AuditStore::Append(const nlohmann::json &record) {
  if (!file_) return;
  const std::string line = record.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0) {
    throw Error(ErrorCode::kIo, "append to audit store " + path_ + " failed");
  }
}

size_t AuditStore::Replay(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read audit store " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  size_t pos = 0;
  int line_no = 0;
  while (pos < content.size()) {
    size_t nl = content.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) {
      spdlog::warn("{}: ignoring unterminated final record (line {})", path,
                   line_no);
      return pos;
    }
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorCode::kIo, path + ":" + std::to_string(line_no) + ": " +
                                      e.what());
    }
    if (line_no == 1) {
      if (record.value("schema", "") != kSchema ||
          record.value("version", 0) != kSchemaVersion) {
        throw Error(ErrorCode::kIo, path + ": unsupported audit store schema");
      }
      continue;
    }
    ApplyRecord(record);
  }
  return pos;
}

AuditItem &AuditStore::MutableItem(std::int64_t item_id) {
  for (auto &it : items_) {
    if (it.item_id == item_id) return it;
  }
  throw Error(ErrorCode::kNotFound, "item " + std::to_string(item_id));
}

void AuditStore::ApplyRecord(const nlohmann::json &r) {
  const auto op = r.at("op").get<std::string>();
  if (op == "enqueue") {
    auto item = AuditItem::FromJson(r.at("item"));
    next_id_ = std::max(next_id_, item.item_id + 1);
    items_.push_back(std::move(item));
  } else if (op == "decision") {
    ApplyDecision(MutableItem(r.at("item_id").get<std::int64_t>()),
                  r.at("auditor_id").get<std::string>(),
                  TagsFromJson(r.at("tags")),
                  r.at("timestamp").get<std::string>());
  } else if (op == "override") {
    ApplyOverride(MutableItem(r.at("item_id").get<std::int64_t>()),
                  r.at("auditor_id").get<std::string>(),
                  TagsFromJson(r.at("tags")),
                  r.at("timestamp").get<std::string>());
  } else if (op == "report") {
    reports_.push_back(IterationReport::FromJson(r.at("report")));
  } else {
    throw Error(ErrorCode::kIo, "unknown audit store op '" + op + "'");
  }
}

std::vector<AuditItem> AuditStore::Enqueue(std::vector<AuditItem> items) {
  std::lock_guard lock(mu_);
  for (auto &it : items) {
    it.item_id = next_id_;
    it.status = AuditStatus::kPending;
    it.decisions.clear();
    it.resolution.reset();
    it.escalated = false;
    it.version = 0;
    Append({{"op", "enqueue"}, {"item", it.ToJson()}});
    ++next_id_;
    items_.push_back(it);
  }
  return items;
}

std::vector<AuditItem> AuditStore::EnqueueConflicts(
    std::span<const LabeledSentence> dataset,
    std::span<const TagSequence> predictions, int iteration) {
  std::vector<AuditItem> fresh;
  {
    std::lock_guard lock(mu_);
    fresh = FindConflicts(dataset, predictions, items_, iteration);
  }
  return Enqueue(std::move(fresh));
}

AuditItem AuditStore::RecordDecision(std::int64_t item_id,
                                     const std::string &auditor_id,
                                     const TagSequence &tags,
                                     std::optional<std::int64_t> expected_version) {
  std::lock_guard lock(mu_);
  AuditItem &live = MutableItem(item_id);
  if (expected_version && *expected_version != live.version) {
    throw Error(ErrorCode::kStaleVersion,
                "item " + std::to_string(item_id) + " is at version " +
                    std::to_string(live.version));
  }
  AuditItem next = live;
  const auto ts = NowTimestamp();
  ApplyDecision(next, auditor_id, tags, ts);
  Append({{"op", "decision"},
          {"item_id", item_id},
          {"auditor_id", auditor_id},
          {"tags", TagsToJson(tags)},
          {"timestamp", ts}});
  live = next;
  return live;
}

AuditItem AuditStore::Override(std::int64_t item_id,
                               const std::string &auditor_id,
                               const TagSequence &tags) {
  std::lock_guard lock(mu_);
  AuditItem &live = MutableItem(item_id);
  AuditItem next = live;
  const auto ts = NowTimestamp();
  ApplyOverride(next, auditor_id, tags, ts);
  Append({{"op", "override"},
          {"item_id", item_id},
          {"auditor_id", auditor_id},
          {"tags", TagsToJson(tags)},
          {"timestamp", ts}});
  live = next;
  return live;
}

void AuditStore::AppendReport(const IterationReport &report) {
  std::lock_guard lock(mu_);
  Append({{"op", "report"}, {"report", report.ToJson()}});
  reports_.push_back(report);
}

std::optional<AuditItem> AuditStore::Item(std::int64_t item_id) const {
  std::lock_guard lock(mu_);
  for (const auto &it : items_) {
    if (it.item_id == item_id) return it;
  }
  return std::nullopt;
}

std::vector<AuditItem> AuditStore::Items() const {
  std::lock_guard lock(mu_);
  return items_;
}

std::vector<AuditItem> AuditStore::ItemsWithStatus(AuditStatus status) const {
  std::lock_guard lock(mu_);
  std::vector<AuditItem> out;
  for (const auto &it : items_) {
    if (it.status == status) out.push_back(it);
  }
  return out;
}

std::vector<AuditItem> AuditStore::Resolved() const {
  return ItemsWithStatus(AuditStatus::kResolved);
}

std::vector<IterationReport> AuditStore::Reports() const {
  std::lock_guard lock(mu_);
  return reports_;
}

nlohmann::json AuditStore::Snapshot() const {
  std::lock_guard lock(mu_);
  nlohmann::json items = nlohmann::json::array();
  for (const auto &it : items_) items.push_back(it.ToJson());
  nlohmann::json reports = nlohmann::json::array();
  for (const auto &r : reports_) reports.push_back(r.ToJson());
  return {{"items", items}, {"reports", reports}, {"next_id", next_id_}};
}

}  // namespace mtbr
