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

#ifndef MTBR_AUDIT_H_
#define MTBR_AUDIT_H_

#include <cstdint>
#include <cstdio>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtbr/corpus.h"

namespace mtbr {

enum class AuditStatus { kPending, kOneDecision, kConflicted, kResolved };

std::string_view AuditStatusName(AuditStatus s);
std::optional<AuditStatus> ParseAuditStatus(std::string_view name);

struct AuditDecision {
  std::string auditor_id;
  TagSequence tags;
  std::string timestamp;
  bool is_override = false;

  bool operator==(const AuditDecision &) const = default;
};

// A sentence whose stored labels and model prediction disagree.
struct AuditItem {
  std::int64_t item_id = 0;
  std::string sentence_id;
  std::vector<std::string> tokens;
  TagSequence stored_tags;
  TagSequence predicted_tags;
  int iteration = 0;
  AuditStatus status = AuditStatus::kPending;
  std::vector<AuditDecision> decisions;
  std::optional<TagSequence> resolution;
  // All three auditors disagreed; only an override can resolve it.
  bool escalated = false;
  // Bumped on every accepted mutation; clients use it to detect stale views.
  std::int64_t version = 0;

  int DisagreementCount() const;
  nlohmann::json ToJson() const;
  nlohmann::json SummaryJson() const;
  static AuditItem FromJson(const nlohmann::json &j);

  bool operator==(const AuditItem &) const = default;
};

// Tags as label names; throws Error(kInvalidTags) on unknown names.
TagSequence TagsFromJson(const nlohmann::json &j);
nlohmann::json TagsToJson(const TagSequence &tags);

// Two-auditor protocol with a tiebreaker:
//   pending -> one_decision -> resolved (second agrees)
//                           -> conflicted (second disagrees)
//   conflicted -> resolved once any two decisions agree; a third distinct
//   answer leaves it conflicted and escalated.
// Throws kInvalidTags, kDuplicateAuditor or kAlreadyResolved without
// modifying `item`.
void ApplyDecision(AuditItem &item, const std::string &auditor_id,
                   const TagSequence &tags, const std::string &timestamp);
// Manual resolution of a conflicted item.
void ApplyOverride(AuditItem &item, const std::string &auditor_id,
                   const TagSequence &tags, const std::string &timestamp);

struct IterationReport {
  int iteration = 0;
  nlohmann::json dev_metrics = nlohmann::json::object();
  std::int64_t dataset_size = 0;
  std::int64_t disagreement_count = 0;
  double disagreement_rate = 0.0;
  std::int64_t audited_count = 0;
  bool converged = false;

  nlohmann::json ToJson() const;
  static IterationReport FromJson(const nlohmann::json &j);
  bool operator==(const IterationReport &) const = default;
};

// Latest disagreement rate below epsilon, or the iteration cap reached.
bool CheckConvergence(std::span<const IterationReport> history,
                      double epsilon, int max_iters);

// New pending items for sentences whose prediction differs from the stored
// tags. A sentence is skipped when it already has an open item, or when a
// resolved item for it has a resolution or an adjudicated prediction equal
// to the new prediction.
std::vector<AuditItem> FindConflicts(std::span<const LabeledSentence> dataset,
                                     std::span<const TagSequence> predictions,
                                     std::span<const AuditItem> existing,
                                     int iteration);

// Replaces tags of sentences with a resolved item (latest item wins) and
// marks them audited. Token sequences are never changed.
std::vector<LabeledSentence> MergeResolved(
    std::span<const LabeledSentence> dataset,
    std::span<const AuditItem> resolved);

std::string NowTimestamp();

// Audit items and iteration reports backed by an append-only JSON-lines
// log. The first line is a schema header; every later line is one
// operation. Mutations are validated, appended and flushed to disk before
// the in-memory state changes. All methods are thread-safe.
class AuditStore {
 public:
  static constexpr const char *kSchema = "mtbr-audit-log";
  static constexpr int kSchemaVersion = 1;

  // Opens (creating if needed) and replays the log at `path`.
  explicit AuditStore(const std::string &path);
  // Volatile store, used by tests.
  AuditStore();
  ~AuditStore();

  AuditStore(const AuditStore &) = delete;
  AuditStore &operator=(const AuditStore &) = delete;

  const std::string &path() const { return path_; }

  std::vector<AuditItem> Enqueue(std::vector<AuditItem> items);
  std::vector<AuditItem> EnqueueConflicts(
      std::span<const LabeledSentence> dataset,
      std::span<const TagSequence> predictions, int iteration);
  // `expected_version`, when given, must equal the item's current version.
  AuditItem RecordDecision(std::int64_t item_id, const std::string &auditor_id,
                           const TagSequence &tags,
                           std::optional<std::int64_t> expected_version = {});
  AuditItem Override(std::int64_t item_id, const std::string &auditor_id,
                     const TagSequence &tags);
  void AppendReport(const IterationReport &report);

  std::optional<AuditItem> Item(std::int64_t item_id) const;
  std::vector<AuditItem> Items() const;
  std::vector<AuditItem> ItemsWithStatus(AuditStatus status) const;
  std::vector<AuditItem> Resolved() const;
  std::vector<IterationReport> Reports() const;

  // Whole in-memory state, for replay comparisons.
  nlohmann::json Snapshot() const;

 private:
  void Append(const nlohmann::json &record);
  // Returns the byte length of the complete records.
  size_t Replay(const std::string &path);
  void ApplyRecord(const nlohmann::json &record);
  AuditItem &MutableItem(std::int64_t item_id);

  std::string path_;
  std::FILE *file_ = nullptr;
  mutable std::mutex mu_;
  std::vector<AuditItem> items_;
  std::vector<IterationReport> reports_;
  std::int64_t next_id_ = 1;
};

}  // namespace mtbr

#endif  // MTBR_AUDIT_H_
