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

#ifndef MTBR_SYNTH_H_
#define MTBR_SYNTH_H_

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "mtbr/corpus.h"

namespace mtbr {

struct SynthConfig {
  int sentences = 2400;
  std::uint64_t seed = 7;
  // Share of name slots filled with a freshly coined name instead of a
  // gazetteer entry.
  double novel_name_rate = 0.3;
};

// Template sentences in a Malay-like toy language whose PER/LOC/ORG
// mentions come from fixed gazetteers. Several names nest or share tokens
// across types ("Johor Bahru" inside an organisation name, "Ismail" as a
// given name and a surname), and a share of names are coined from
// syllables, so boundaries are not trivially lexical.
std::vector<LabeledSentence> GenerateSyntheticCorpus(const SynthConfig &cfg);

// Rule/gazetteer config (RuleConfig JSON) covering the synthetic lexicon:
// title-cue rules, place/organisation prefix rules and part of the
// gazetteer.
nlohmann::json SyntheticRuleConfig();

}  // namespace mtbr

#endif  // MTBR_SYNTH_H_
