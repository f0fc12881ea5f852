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
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "mtbr/bootstrap.h"
#include "mtbr/error.h"
#include "mtbr/synth.h"
#include "testing.h"

namespace mtbr {
namespace {

using nlohmann::json;
using testing::Sentence;
using Tokens = std::vector<std::string>;

std::vector<std::string> TagNames(const LabeledSentence &s) {
  std::vector<std::string> out;
  for (int t : s.ner_tags) out.emplace_back(kNerLabelNames[t]);
  return out;
}

TEST_CASE("tokenize") {
  CHECK(Tokenize("Harga: 12, naik!") == Tokens{"Harga", ":", "12", ",", "naik", "!"});
  CHECK(Tokenize("  ").empty());
  CHECK(IsPunctuationToken("..."));
  CHECK_FALSE(IsPunctuationToken("a."));
  CHECK(IsDigitToken("2020"));
  CHECK_FALSE(IsDigitToken("20a"));
  CHECK(IsCapitalized("Ali"));
  CHECK_FALSE(IsCapitalized("ali"));
}

TEST_CASE("vocabulary") {
  std::vector<std::string> docs = {"saya suka saya"};
  auto v = BuildVocab(docs, true);
  CHECK(v.size() == 2);
  CHECK(v.SortedTokens() == Tokens{"saya", "suka"});
  CHECK(BuildVocab(std::vector<std::string>{}, true).size() == 0);
  CHECK(v.Contains("SAYA"));
  auto strict = BuildVocab(docs, false);
  CHECK_FALSE(strict.Contains("SAYA"));
}

TEST_CASE("vocabulary size matches a set oracle") {
  SynthConfig sc;
  sc.sentences = 1000;
  std::vector<std::string> docs;
  std::set<std::string> folded, exact;
  for (const auto &s : GenerateSyntheticCorpus(sc)) {
    std::string line;
    for (const auto &t : s.tokens) {
      line += t + " ";
      exact.insert(t);
      std::string f = t;
      std::transform(f.begin(), f.end(), f.begin(), ::tolower);
      folded.insert(f);
    }
    docs.push_back(line);
  }
  CHECK(BuildVocab(docs, true).size() == folded.size());
  CHECK(BuildVocab(docs, false).size() == exact.size());
}

TEST_CASE("vocabulary file round trip") {
  testing::TempDir dir;
  std::vector<std::string> docs = {"Saya makan nasi di Ipoh"};
  auto v = BuildVocab(docs, true);
  v.Save(dir.File("v.txt"));
  auto back = Vocabulary::Load(dir.File("v.txt"), true);
  CHECK(back.SortedTokens() == v.SortedTokens());
}

TEST_CASE("filter examples") {
  std::vector<std::string> docs = {"saya suka nasi"};
  auto v = BuildVocab(docs, true);
  std::vector<LabeledSentence> src = {
      Sentence({"saya", "suka", "nasi"}, {"O", "O", "O"}),
      Sentence({"saya", "suka", "rendang"}, {"O", "O", "O"})};
  auto kept = FilterByVocab(src, v);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].tokens == src[0].tokens);
  CHECK(kept[0].provenance == Provenance::kHomologous);

  std::vector<std::string> harga = {"harga"};
  auto hv = BuildVocab(harga, true);
  CHECK(PassesVocabFilter(Tokens{"Harga", ":", "12"}, hv));
}

TEST_CASE("filter soundness on random inputs") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 300; ++k) {
    Vocabulary v(true);
    std::set<std::string> members;
    for (int i = 0; i < 8; ++i) {
      auto t = testing::RandomToken(rng);
      std::transform(t.begin(), t.end(), t.begin(), ::tolower);
      v.Add(t);
      members.insert(t);
    }
    auto data = testing::RandomDataset(rng, 20, 4);
    auto kept = FilterByVocab(data, v);
    size_t expected = 0;
    for (const auto &s : data) {
      bool ok = true;
      for (const auto &t : s.tokens) {
        std::string f = t;
        std::transform(f.begin(), f.end(), f.begin(), ::tolower);
        const bool digits = std::all_of(t.begin(), t.end(), ::isdigit);
        const bool punct = std::all_of(t.begin(), t.end(), ::ispunct);
        ok = ok && (members.count(f) || digits || punct);
      }
      expected += ok;
    }
    CHECK(kept.size() == expected);
    for (const auto &s : kept) {
      CHECK(PassesVocabFilter(s.tokens, v));
      CHECK(std::find(data.begin(), data.end(),
                      [&] { auto c = s; c.provenance = Provenance::kExternal; return c; }()) !=
            data.end());
    }
  }
}

RuleConfig Config(const json &j) { return RuleConfig::FromJson(j); }

TEST_CASE("title rule") {
  auto cfg = Config({{"rules",
                      {{{"id", "encik"},
                        {"trigger", "Encik"},
                        {"position", "precedes_entity"},
                        {"type", "PER"},
                        {"capitalization_required", true}}}}});
  auto s = ApplyRules(Tokens{"Encik", "Ali"}, cfg);
  REQUIRE(s);
  CHECK(TagNames(*s) == Tokens{"O", "B-PER"});
  CHECK(s->provenance == Provenance::kRule);
  CHECK_FALSE(ApplyRules(Tokens{"makan", "nasi"}, Config(json::object())));
}

TEST_CASE("gazetteer longest match") {
  auto cfg = Config({{"gazetteer",
                      {{{"surface", "Kuala"}, {"type", "ORG"}},
                       {{"surface", "Kuala Lumpur"}, {"type", "LOC"}}}}});
  auto s = ApplyRules(Tokens{"di", "Kuala", "Lumpur"}, cfg);
  REQUIRE(s);
  CHECK(TagNames(*s) == Tokens{"O", "B-LOC", "I-LOC"});
}

TEST_CASE("rule positions and limits") {
  auto cfg = Config({{"rules",
                      {{{"id", "said"},
                        {"trigger", {"berkata"}},
                        {"position", "follows_entity"},
                        {"type", "PER"},
                        {"max_span_len", 2}},
                       {{"id", "uni"},
                        {"trigger", {"Universiti"}},
                        {"position", "is_prefix_token"},
                        {"type", "ORG"},
                        {"max_span_len", 3}}}}});
  auto s = ApplyRules(Tokens{"Kata", "Ahmad", "Razak", "berkata", "di", "Universiti",
                             "Sains", "Malaysia", "Pulau"},
                      cfg);
  REQUIRE(s);
  CHECK(TagNames(*s) ==
        Tokens{"O", "B-PER", "I-PER", "O", "O", "B-ORG", "I-ORG", "I-ORG", "O"});
  // A prefix trigger alone is not an entity.
  CHECK_FALSE(ApplyRules(Tokens{"ke", "Universiti"}, cfg));
}

TEST_CASE("rule conflict") {
  auto cfg = Config({{"rules",
                      {{{"id", "a"}, {"trigger", "Datuk"}, {"position", "precedes_entity"}, {"type", "PER"}},
                       {{"id", "b"}, {"trigger", "Datuk"}, {"position", "precedes_entity"}, {"type", "ORG"}}}}});
  try {
    ApplyRules(Tokens{"Datuk", "Seri"}, cfg);
    FAIL("expected conflict");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kRuleConflict);
  }
  std::vector<Tokens> batch = {{"Datuk", "Seri"}, {"makan", "nasi"}};
  auto res = TagSentencesWithRules(batch, cfg);
  CHECK(res.conflicts == 1);
  CHECK(res.untouched == 1);
  CHECK(res.tagged.empty());
}

TEST_CASE("rule config rejects unknown keys") {
  CHECK_THROWS_AS(Config({{"rulez", json::array()}}), Error);
  CHECK_THROWS_AS(Config({{"rules", {{{"id", "x"}, {"trigger", "a"}, {"position", "precedes_entity"},
                                       {"type", "PER"}, {"weight", 2}}}}}),
                  Error);
}

TEST_CASE("rule output is valid BIO2 on the synthetic lexicon") {
  auto cfg = RuleConfig::FromJson(SyntheticRuleConfig());
  SynthConfig sc;
  sc.sentences = 500;
  size_t fired = 0;
  for (const auto &s : GenerateSyntheticCorpus(sc)) {
    try {
      auto out = ApplyRules(s.tokens, cfg);
      if (!out) continue;
      ++fired;
      CHECK(IsValidBio2(out->ner_tags));
      CHECK(out->tokens == s.tokens);
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kRuleConflict);
    }
  }
  CHECK(fired > 250);
}

TEST_CASE("assemble seed") {
  std::vector<LabeledSentence> a = {Sentence({"a"}, {"O"}), Sentence({"b"}, {"O"}),
                                    Sentence({"c"}, {"O"})};
  std::vector<LabeledSentence> b = {Sentence({"d"}, {"O"}), Sentence({"e"}, {"O"})};
  CHECK(AssembleSeed(a, b).size() == 5);
  CHECK(AssembleSeed({}, {}).empty());
  auto homo = Sentence({"Ali", "makan"}, {"B-PER", "O"});
  homo.provenance = Provenance::kHomologous;
  auto rule = Sentence({"Ali", "makan"}, {"O", "O"});
  rule.provenance = Provenance::kRule;
  std::vector<LabeledSentence> h = {homo}, r = {rule};
  auto seed = AssembleSeed(h, r);
  REQUIRE(seed.size() == 1);
  CHECK(seed[0].provenance == Provenance::kHomologous);
  CHECK(seed[0].ner_tags == homo.ner_tags);
}

}  // namespace
}  // namespace mtbr
