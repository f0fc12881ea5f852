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

#include "mtbr/corpus.h"

#include <fstream>
#include <random>
#include <sstream>

#include "mtbr/error.h"
#include "mtbr/tagset.h"

namespace mtbr {

namespace {

bool IsHorizontalSpace(char c) { return c == ' ' || c == '\t'; }

// Legal predecessor check for one position.
bool TransitionOk(int prev, int cur) {
  if (!IsInside(cur)) return true;
  return prev >= 0 && prev != kO && LabelType(prev) == LabelType(cur);
}

}  // namespace

std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kHomologous: return "homologous";
    case Provenance::kRule: return "rule";
    case Provenance::kAudited: return "audited";
    case Provenance::kSynthetic: return "synthetic";
    case Provenance::kExternal: return "external";
  }
  return "external";
}

Provenance ParseProvenance(std::string_view name) {
  for (auto p : {Provenance::kHomologous, Provenance::kRule,
                 Provenance::kAudited, Provenance::kSynthetic,
                 Provenance::kExternal}) {
    if (ProvenanceName(p) == name) return p;
  }
  throw Error(ErrorCode::kBadConfig,
              "unknown provenance '" + std::string(name) + "'");
}

bool IsValidBio2(std::span<const int> tags) {
  int prev = -1;
  for (int t : tags) {
    if (t < 0 || t >= kNumNerLabels) return false;
    if (!TransitionOk(prev, t)) return false;
    prev = t;
  }
  return true;
}

void ValidateBio2(std::span<const int> tags) {
  int prev = -1;
  for (size_t i = 0; i < tags.size(); ++i) {
    int t = tags[i];
    if (t < 0 || t >= kNumNerLabels) {
      throw Error(ErrorCode::kUnknownTag,
                  "label index " + std::to_string(t) + " at position " +
                      std::to_string(i));
    }
    if (!TransitionOk(prev, t)) {
      throw Error(ErrorCode::kIllegalTransition,
                  std::string(kNerLabelNames[t]) + " at position " +
                      std::to_string(i));
    }
    prev = t;
  }
}

std::vector<LabeledSentence> ParseBio2(std::string_view text,
                                       std::string_view source,
                                       Provenance provenance) {
  std::vector<LabeledSentence> out;
  LabeledSentence cur;
  int prev = -1;
  size_t line_no = 0;

  auto flush = [&]() {
    if (cur.tokens.empty()) return;
    cur.id = std::string(source) + ":" + std::to_string(out.size() + 1);
    cur.provenance = provenance;
    out.push_back(std::move(cur));
    cur = LabeledSentence{};
    prev = -1;
  };

  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    const bool at_end = nl >= text.size();
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    size_t b = 0;
    while (b < line.size() && IsHorizontalSpace(line[b])) ++b;
    size_t e = line.size();
    while (e > b && IsHorizontalSpace(line[e - 1])) --e;
    std::string_view body = line.substr(b, e - b);

    if (body.empty()) {
      flush();
      if (at_end) break;
      continue;
    }
    size_t sep = 0;
    while (sep < body.size() && !IsHorizontalSpace(body[sep])) ++sep;
    size_t tag_begin = sep;
    while (tag_begin < body.size() && IsHorizontalSpace(body[tag_begin])) {
      ++tag_begin;
    }
    std::string_view token = body.substr(0, sep);
    std::string_view tag = body.substr(tag_begin);
    if (tag.empty()) {
      throw Error(ErrorCode::kUnknownTag,
                  "line " + std::to_string(line_no) + ": missing tag");
    }
    for (char c : tag) {
      if (IsHorizontalSpace(c)) {
        throw Error(ErrorCode::kUnknownTag,
                    "line " + std::to_string(line_no) +
                        ": more than two fields");
      }
    }
    auto label = ParseNerLabel(tag);
    if (!label) {
      throw Error(ErrorCode::kUnknownTag, "line " + std::to_string(line_no) +
                                              ": '" + std::string(tag) + "'");
    }
    if (!TransitionOk(prev, *label)) {
      throw Error(ErrorCode::kIllegalTransition,
                  "line " + std::to_string(line_no) + ": " + std::string(tag) +
                      " does not continue an entity of the same type");
    }
    cur.tokens.emplace_back(token);
    cur.ner_tags.push_back(*label);
    prev = *label;
    if (at_end) {
      flush();
      break;
    }
  }
  return out;
}

std::string SerializeBio2(std::span<const LabeledSentence> sentences) {
  std::string out;
  for (const auto &s : sentences) {
    if (s.tokens.empty()) {
      throw Error(ErrorCode::kEmptySentence, "sentence " + s.id);
    }
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      out += '\t';
      out += kNerLabelNames[s.ner_tags[i]];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<LabeledSentence> ReadBio2File(const std::string &path,
                                          Provenance provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string source = path;
  if (auto slash = source.find_last_of('/'); slash != std::string::npos) {
    source = source.substr(slash + 1);
  }
  return ParseBio2(buf.str(), source, provenance);
}

void WriteBio2File(const std::string &path,
                   std::span<const LabeledSentence> sentences) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << SerializeBio2(sentences);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::vector<EntitySpan> ExtractEntities(std::span<const int> tags) {
  std::vector<EntitySpan> spans;
  const int n = static_cast<int>(tags.size());
  int i = 0;
  while (i < n) {
    int t = tags[i];
    if (t == kO || IsInside(t)) {
      ++i;
      continue;
    }
    int type = LabelType(t);
    int j = i + 1;
    while (j < n && tags[j] == InsideLabel(type)) ++j;
    spans.push_back({i, j - 1, type});
    i = j;
  }
  return spans;
}

BoundaryTargets DeriveBoundaryTargets(std::span<const int> tags) {
  BoundaryTargets t;
  t.start_flags.assign(tags.size(), 0);
  t.end_flags.assign(tags.size(), 0);
  for (const auto &span : ExtractEntities(tags)) {
    t.start_flags[span.start] = 1;
    t.end_flags[span.end] = 1;
  }
  return t;
}

std::vector<int> DeriveSpanTagTargets(std::span<const int> tags) {
  std::vector<int> out(tags.size(), kSpanO);
  for (const auto &span : ExtractEntities(tags)) {
    for (int k = span.start; k <= span.end; ++k) out[k] = span.type;
  }
  return out;
}

TagSequence RepairBio2(std::span<const int> tags) {
  TagSequence out(tags.begin(), tags.end());
  int prev = -1;
  for (auto &t : out) {
    if (!TransitionOk(prev, t)) t = BeginLabel(LabelType(t));
    prev = t;
  }
  return out;
}

TagSequence TagsFromEntities(std::span<const EntitySpan> spans, int length) {
  TagSequence tags(length, kO);
  for (const auto &s : spans) {
    tags[s.start] = BeginLabel(s.type);
    for (int k = s.start + 1; k <= s.end; ++k) tags[k] = InsideLabel(s.type);
  }
  return tags;
}

DatasetSplit SplitDataset(std::span<const LabeledSentence> data,
                          std::uint64_t seed) {
  const size_t n = data.size();
  if (n < 10) {
    throw Error(ErrorCode::kTooFewSentences,
                "need at least 10 sentences, got " + std::to_string(n));
  }
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  // Fisher-Yates with an explicit engine so splits are stable across
  // standard library implementations.
  std::mt19937_64 rng(seed);
  for (size_t i = n - 1; i > 0; --i) {
    size_t j = rng() % (i + 1);
    std::swap(order[i], order[j]);
  }
  const size_t n_train = n * 8 / 10;
  const size_t n_dev = n / 10;
  DatasetSplit split;
  for (size_t k = 0; k < n; ++k) {
    const auto &s = data[order[k]];
    if (k < n_train) {
      split.train.push_back(s);
    } else if (k < n_train + n_dev) {
      split.dev.push_back(s);
    } else {
      split.test.push_back(s);
    }
  }
  return split;
}

DatasetStats ComputeDatasetStats(std::span<const LabeledSentence> data) {
  DatasetStats st;
  for (const auto &s : data) {
    ++st.sentence_count;
    st.token_count += static_cast<std::int64_t>(s.tokens.size());
    for (const auto &e : ExtractEntities(s.ner_tags)) ++st.entity_counts[e.type];
  }
  return st;
}

std::string FormatStatsReport(const DatasetStats &stats) {
  std::ostringstream os;
  os << "sentences\t" << stats.sentence_count << "\n";
  os << "tokens\t" << stats.token_count << "\n";
  for (int t = 0; t < kNumEntityTypes; ++t) {
    os << kSpanTagNames[t] << "\t" << stats.entity_counts[t] << "\n";
  }
  return os.str();
}

nlohmann::json StatsToJson(const DatasetStats &stats) {
  return {{"sentences", stats.sentence_count},
          {"tokens", stats.token_count},
          {"entities",
           {{"PER", stats.entity_counts[kSpanPer]},
            {"LOC", stats.entity_counts[kSpanLoc]},
            {"ORG", stats.entity_counts[kSpanOrg]}}}};
}

}  // namespace mtbr
