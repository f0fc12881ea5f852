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

#ifndef MTBR_CORPUS_H_
#define MTBR_CORPUS_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mtbr {

enum class Provenance { kHomologous, kRule, kAudited, kSynthetic, kExternal };

std::string_view ProvenanceName(Provenance p);
Provenance ParseProvenance(std::string_view name);

using TagSequence = std::vector<int>;

struct LabeledSentence {
  std::string id;
  std::vector<std::string> tokens;
  TagSequence ner_tags;
  Provenance provenance = Provenance::kExternal;

  // Sentence identity ignores the id, which is bookkeeping.
  bool operator==(const LabeledSentence &other) const {
    return tokens == other.tokens && ner_tags == other.ner_tags &&
           provenance == other.provenance;
  }
};

struct EntitySpan {
  int start = 0;  // inclusive
  int end = 0;    // inclusive
  int type = 0;   // SpanTag, never kSpanO

  auto operator<=>(const EntitySpan &) const = default;
};

struct BoundaryTargets {
  std::vector<int> start_flags;
  std::vector<int> end_flags;
};

struct DatasetStats {
  std::int64_t sentence_count = 0;
  std::int64_t token_count = 0;
  std::array<std::int64_t, 3> entity_counts{};  // PER, LOC, ORG

  bool operator==(const DatasetStats &) const = default;
};

// Returns true when `tags` is a legal BIO2 sequence over the 7-label set.
bool IsValidBio2(std::span<const int> tags);

// Throws Error(kIllegalTransition) naming the offending position.
void ValidateBio2(std::span<const int> tags);

// Parses a BIO2 document: one "token<ws>tag" per line, blank line between
// sentences. Ids are "<source>:<ordinal>" with a 1-based ordinal.
std::vector<LabeledSentence> ParseBio2(std::string_view text,
                                       std::string_view source = "doc",
                                       Provenance provenance =
                                           Provenance::kExternal);
std::string SerializeBio2(std::span<const LabeledSentence> sentences);

std::vector<LabeledSentence> ReadBio2File(const std::string &path,
                                          Provenance provenance =
                                              Provenance::kExternal);
void WriteBio2File(const std::string &path,
                   std::span<const LabeledSentence> sentences);

std::vector<EntitySpan> ExtractEntities(std::span<const int> tags);
inline std::vector<EntitySpan> ExtractEntities(const LabeledSentence &s) {
  return ExtractEntities(s.ner_tags);
}

BoundaryTargets DeriveBoundaryTargets(std::span<const int> tags);
// Per-token SpanTag: the entity type for tokens inside an entity, else O.
std::vector<int> DeriveSpanTagTargets(std::span<const int> tags);

// Turns an arbitrary label-index sequence into valid BIO2: an I-X with no
// B-X/I-X predecessor becomes B-X. Idempotent.
TagSequence RepairBio2(std::span<const int> tags);

// Rebuilds BIO2 tags from entity spans (used by decoders and tests).
TagSequence TagsFromEntities(std::span<const EntitySpan> spans, int length);

struct DatasetSplit {
  std::vector<LabeledSentence> train;
  std::vector<LabeledSentence> dev;
  std::vector<LabeledSentence> test;
};

// Seeded uniform shuffle followed by contiguous 80/10/10 slicing; the test
// part takes the remainder.
DatasetSplit SplitDataset(std::span<const LabeledSentence> data,
                          std::uint64_t seed);

DatasetStats ComputeDatasetStats(std::span<const LabeledSentence> data);
std::string FormatStatsReport(const DatasetStats &stats);
nlohmann::json StatsToJson(const DatasetStats &stats);

}  // namespace mtbr

#endif  // MTBR_CORPUS_H_
