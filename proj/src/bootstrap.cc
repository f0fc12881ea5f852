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

#include "mtbr/bootstrap.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "mtbr/error.h"
#include "mtbr/tagset.h"

namespace mtbr {

namespace {

bool IsAsciiPunct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string FoldCase(std::string_view token) {
  std::string out(token);
  for (auto &c : out) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

RulePosition ParsePosition(const std::string &s) {
  if (s == "precedes_entity") return RulePosition::kPrecedesEntity;
  if (s == "follows_entity") return RulePosition::kFollowsEntity;
  if (s == "is_prefix_token") return RulePosition::kIsPrefixToken;
  throw Error(ErrorCode::kBadConfig, "unknown rule position '" + s + "'");
}

int ParseEntityType(const std::string &s) {
  auto t = ParseSpanTag(s);
  if (!t || *t == kSpanO) {
    throw Error(ErrorCode::kBadConfig, "entity type must be PER, LOC or ORG");
  }
  return *t;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (IsSpace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else if (IsAsciiPunct(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool IsPunctuationToken(std::string_view token) {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return IsAsciiPunct(static_cast<unsigned char>(c));
  });
}

bool IsDigitToken(std::string_view token) {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
}

bool IsCapitalized(std::string_view token) {
  return !token.empty() && token[0] >= 'A' && token[0] <= 'Z';
}

std::string Vocabulary::Normalize(std::string_view token) const {
  return case_fold_ ? FoldCase(token) : std::string(token);
}

void Vocabulary::Add(std::string_view token) {
  if (token.empty()) return;
  tokens_.insert(Normalize(token));
}

bool Vocabulary::Contains(std::string_view token) const {
  return tokens_.count(Normalize(token)) > 0;
}

std::vector<std::string> Vocabulary::SortedTokens() const {
  std::vector<std::string> v(tokens_.begin(), tokens_.end());
  std::sort(v.begin(), v.end());
  return v;
}

Vocabulary Vocabulary::Load(const std::string &path, bool case_fold) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open vocabulary " + path);
  Vocabulary v(case_fold);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    v.Add(line);
  }
  return v;
}

void Vocabulary::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write vocabulary " + path);
  for (const auto &t : SortedTokens()) out << t << '\n';
}

Vocabulary BuildVocab(std::span<const std::string> documents, bool case_fold) {
  Vocabulary v(case_fold);
  for (const auto &doc : documents) {
    for (const auto &tok : Tokenize(doc)) v.Add(tok);
  }
  return v;
}

bool PassesVocabFilter(std::span<const std::string> tokens,
                       const Vocabulary &vocab) {
  for (const auto &t : tokens) {
    if (IsPunctuationToken(t) || IsDigitToken(t)) continue;
    if (!vocab.Contains(t)) return false;
  }
  return true;
}

std::vector<LabeledSentence> FilterByVocab(
    std::span<const LabeledSentence> source, const Vocabulary &vocab) {
  std::vector<LabeledSentence> out;
  for (const auto &s : source) {
    if (!PassesVocabFilter(s.tokens, vocab)) continue;
    out.push_back(s);
    out.back().provenance = Provenance::kHomologous;
  }
  return out;
}

std::string Gazetteer::Key(std::string_view token) const {
  return case_fold_ ? FoldCase(token) : std::string(token);
}

void Gazetteer::Add(std::string_view surface, int type) {
  auto toks = Tokenize(surface);
  if (toks.empty()) return;
  int node = 0;
  for (const auto &t : toks) {
    auto key = Key(t);
    auto it = nodes_[node].children.find(key);
    if (it == nodes_[node].children.end()) {
      nodes_.push_back(Node{});
      int child = static_cast<int>(nodes_.size()) - 1;
      nodes_[node].children.emplace(key, child);
      node = child;
    } else {
      node = it->second;
    }
  }
  if (nodes_[node].type < 0) ++size_;
  nodes_[node].type = type;
}

std::optional<std::pair<int, int>> Gazetteer::LongestMatch(
    std::span<const std::string> tokens, size_t start) const {
  std::optional<std::pair<int, int>> best;
  int node = 0;
  for (size_t k = start; k < tokens.size(); ++k) {
    auto it = nodes_[node].children.find(Key(tokens[k]));
    if (it == nodes_[node].children.end()) break;
    node = it->second;
    if (nodes_[node].type >= 0) {
      best = {static_cast<int>(k - start + 1), nodes_[node].type};
    }
  }
  return best;
}

RuleConfig RuleConfig::FromJson(const nlohmann::json &j) {
  static const std::set<std::string> kTop = {"case_fold", "rules", "gazetteer"};
  static const std::set<std::string> kRuleKeys = {
      "id", "trigger", "position", "type", "capitalization_required",
      "max_span_len"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kTop.count(it.key())) {
      throw Error(ErrorCode::kBadConfig, "unknown key '" + it.key() + "'");
    }
  }
  RuleConfig cfg;
  cfg.case_fold = j.value("case_fold", true);
  cfg.gazetteer = Gazetteer(cfg.case_fold);
  for (const auto &r : j.value("rules", nlohmann::json::array())) {
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (!kRuleKeys.count(it.key())) {
        throw Error(ErrorCode::kBadConfig,
                    "unknown rule key '" + it.key() + "'");
      }
    }
    Rule rule;
    rule.id = r.at("id").get<std::string>();
    const auto &trig = r.at("trigger");
    if (trig.is_string()) {
      rule.triggers.push_back(trig.get<std::string>());
    } else {
      rule.triggers = trig.get<std::vector<std::string>>();
    }
    for (auto &t : rule.triggers) {
      if (cfg.case_fold) t = FoldCase(t);
    }
    std::erase_if(rule.triggers, [](const std::string &t) { return t.empty(); });
    if (rule.triggers.empty()) {
      throw Error(ErrorCode::kBadConfig, "rule " + rule.id + ": no trigger");
    }
    rule.position = ParsePosition(r.at("position").get<std::string>());
    rule.type = ParseEntityType(r.at("type").get<std::string>());
    rule.capitalization_required = r.value("capitalization_required", true);
    rule.max_span_len = r.value("max_span_len", 3);
    if (rule.max_span_len < 1) {
      throw Error(ErrorCode::kBadConfig,
                  "rule " + rule.id + ": max_span_len must be >= 1");
    }
    cfg.rules.push_back(std::move(rule));
  }
  for (const auto &g : j.value("gazetteer", nlohmann::json::array())) {
    cfg.gazetteer.Add(g.at("surface").get<std::string>(),
                      ParseEntityType(g.at("type").get<std::string>()));
  }
  return cfg;
}

RuleConfig RuleConfig::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open rules file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadConfig, path + ": " + e.what());
  }
  return FromJson(j);
}

std::optional<LabeledSentence> ApplyRules(std::span<const std::string> tokens,
                                          const RuleConfig &config) {
  const int n = static_cast<int>(tokens.size());
  if (n == 0) throw Error(ErrorCode::kEmptySentence, "no tokens");

  std::vector<EntitySpan> spans;
  std::vector<bool> covered(n, false);
  for (int i = 0; i < n;) {
    if (auto m = config.gazetteer.LongestMatch(tokens, i)) {
      spans.push_back({i, i + m->first - 1, m->second});
      for (int k = i; k < i + m->first; ++k) covered[k] = true;
      i += m->first;
    } else {
      ++i;
    }
  }

  auto eligible = [&](int k, const Rule &r) {
    if (covered[k] || IsPunctuationToken(tokens[k])) return false;
    return !r.capitalization_required || IsCapitalized(tokens[k]);
  };

  struct Candidate {
    EntitySpan span;
    const Rule *rule;
  };
  std::vector<Candidate> cands;
  for (const auto &rule : config.rules) {
    for (int k = 0; k < n; ++k) {
      std::string key = config.case_fold ? FoldCase(tokens[k]) : tokens[k];
      if (std::find(rule.triggers.begin(), rule.triggers.end(), key) ==
          rule.triggers.end()) {
        continue;
      }
      switch (rule.position) {
        case RulePosition::kPrecedesEntity: {
          int j = k + 1;
          while (j < n && j - (k + 1) < rule.max_span_len && eligible(j, rule)) ++j;
          if (j > k + 1) cands.push_back({{k + 1, j - 1, rule.type}, &rule});
          break;
        }
        case RulePosition::kFollowsEntity: {
          int j = k - 1;
          while (j >= 0 && (k - 1) - j < rule.max_span_len && eligible(j, rule)) --j;
          if (j < k - 1) cands.push_back({{j + 1, k - 1, rule.type}, &rule});
          break;
        }
        case RulePosition::kIsPrefixToken: {
          if (!eligible(k, rule)) break;
          int j = k + 1;
          while (j < n && j - k < rule.max_span_len && eligible(j, rule)) ++j;
          if (j > k + 1) cands.push_back({{k, j - 1, rule.type}, &rule});
          break;
        }
      }
    }
  }

  for (size_t a = 0; a < cands.size(); ++a) {
    for (size_t b = a + 1; b < cands.size(); ++b) {
      const auto &x = cands[a].span;
      const auto &y = cands[b].span;
      if (x.start == y.start && x.end == y.end && x.type != y.type) {
        throw Error(ErrorCode::kRuleConflict,
                    "rules " + cands[a].rule->id + " and " +
                        cands[b].rule->id + " disagree on tokens " +
                        std::to_string(x.start) + ".." +
                        std::to_string(x.end));
      }
    }
  }

  std::sort(cands.begin(), cands.end(), [](const auto &a, const auto &b) {
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return a.span.end > b.span.end;
  });
  int last_end = -1;
  for (const auto &c : cands) {
    if (c.span.start <= last_end) continue;
    spans.push_back(c.span);
    last_end = c.span.end;
  }
  if (spans.empty()) return std::nullopt;
  std::sort(spans.begin(), spans.end());

  LabeledSentence s;
  s.tokens.assign(tokens.begin(), tokens.end());
  s.ner_tags = TagsFromEntities(spans, n);
  s.provenance = Provenance::kRule;
  return s;
}

RuleTaggingResult TagSentencesWithRules(
    std::span<const std::vector<std::string>> sentences,
    const RuleConfig &config, std::string_view source) {
  RuleTaggingResult result;
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].empty()) continue;
    try {
      auto s = ApplyRules(sentences[i], config);
      if (!s) {
        ++result.untouched;
        continue;
      }
      s->id = std::string(source) + ":" + std::to_string(i + 1);
      result.tagged.push_back(std::move(*s));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kRuleConflict) throw;
      ++result.conflicts;
      spdlog::warn("sentence {} skipped: {}", i + 1, e.what());
    }
  }
  return result;
}

std::vector<LabeledSentence> AssembleSeed(
    std::span<const LabeledSentence> homologous,
    std::span<const LabeledSentence> rule_tagged) {
  std::set<std::vector<std::string>> seen;
  std::vector<LabeledSentence> out;
  for (auto part : {homologous, rule_tagged}) {
    for (const auto &s : part) {
      if (seen.insert(s.tokens).second) out.push_back(s);
    }
  }
  return out;
}

}  // namespace mtbr
