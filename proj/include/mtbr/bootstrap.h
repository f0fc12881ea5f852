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

#ifndef MTBR_BOOTSTRAP_H_
#define MTBR_BOOTSTRAP_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mtbr/corpus.h"

namespace mtbr {

// Splits on whitespace and isolates ASCII punctuation as single tokens.
// Bytes >= 0x80 are treated as word characters so UTF-8 text stays intact.
std::vector<std::string> Tokenize(std::string_view text);

bool IsPunctuationToken(std::string_view token);
bool IsDigitToken(std::string_view token);
bool IsCapitalized(std::string_view token);

class Vocabulary {
 public:
  explicit Vocabulary(bool case_fold = true) : case_fold_(case_fold) {}

  bool case_fold() const { return case_fold_; }
  size_t size() const { return tokens_.size(); }

  std::string Normalize(std::string_view token) const;
  void Add(std::string_view token);
  bool Contains(std::string_view token) const;

  // Sorted for stable files.
  std::vector<std::string> SortedTokens() const;

  static Vocabulary Load(const std::string &path, bool case_fold);
  void Save(const std::string &path) const;

 private:
  bool case_fold_;
  std::unordered_set<std::string> tokens_;
};

// One document per element; tokens from all of them are added.
Vocabulary BuildVocab(std::span<const std::string> documents, bool case_fold);

// The dictionary test: every token is in the vocabulary, or is punctuation,
// or is all digits.
bool PassesVocabFilter(std::span<const std::string> tokens,
                       const Vocabulary &vocab);

std::vector<LabeledSentence> FilterByVocab(
    std::span<const LabeledSentence> source, const Vocabulary &vocab);

enum class RulePosition { kPrecedesEntity, kFollowsEntity, kIsPrefixToken };

struct Rule {
  std::string id;
  std::vector<std::string> triggers;
  RulePosition position = RulePosition::kPrecedesEntity;
  int type = 0;  // SpanTag PER/LOC/ORG
  bool capitalization_required = true;
  int max_span_len = 3;
};

// Multi-token surface forms matched longest-first.
class Gazetteer {
 public:
  explicit Gazetteer(bool case_fold = true) : case_fold_(case_fold) {}

  void Add(std::string_view surface, int type);
  size_t size() const { return size_; }

  // Longest entry starting at `start`: (length, type), or nullopt.
  std::optional<std::pair<int, int>> LongestMatch(
      std::span<const std::string> tokens, size_t start) const;

 private:
  struct Node {
    std::map<std::string, int> children;
    int type = -1;
  };
  std::string Key(std::string_view token) const;

  bool case_fold_;
  std::vector<Node> nodes_{Node{}};
  size_t size_ = 0;
};

struct RuleConfig {
  bool case_fold = true;
  std::vector<Rule> rules;
  Gazetteer gazetteer;

  // JSON: {"case_fold": bool, "rules": [...], "gazetteer": [...]}.
  static RuleConfig Load(const std::string &path);
  static RuleConfig FromJson(const nlohmann::json &j);
};

// Gazetteer longest match first, then trigger rules on the uncovered
// tokens. Returns nullopt when nothing fires; throws Error(kRuleConflict)
// when two rules type the same span differently.
std::optional<LabeledSentence> ApplyRules(std::span<const std::string> tokens,
                                          const RuleConfig &config);

// Runs ApplyRules over many sentences, skipping (and counting) conflicts.
struct RuleTaggingResult {
  std::vector<LabeledSentence> tagged;
  size_t conflicts = 0;
  size_t untouched = 0;
};
RuleTaggingResult TagSentencesWithRules(
    std::span<const std::vector<std::string>> sentences,
    const RuleConfig &config, std::string_view source = "rules");

// Concatenates and drops later sentences whose token sequence was already
// seen.
std::vector<LabeledSentence> AssembleSeed(
    std::span<const LabeledSentence> homologous,
    std::span<const LabeledSentence> rule_tagged);

}  // namespace mtbr

#endif  // MTBR_BOOTSTRAP_H_
