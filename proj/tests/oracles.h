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

#ifndef MTBR_TESTS_ORACLES_H_
#define MTBR_TESTS_ORACLES_H_

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "mtbr/corpus.h"
#include "mtbr/tagset.h"
#include "testing.h"

namespace mtbr::testing {

struct MatchCounts {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

// Tries every assignment of predictions to unused identical gold spans.
inline int BestMatching(const std::vector<EntitySpan> &gold,
                        const std::vector<EntitySpan> &pred, size_t k,
                        std::vector<bool> &used) {
  if (k == pred.size()) return 0;
  int best = BestMatching(gold, pred, k + 1, used);
  for (size_t g = 0; g < gold.size(); ++g) {
    if (used[g] || !(gold[g] == pred[k])) continue;
    used[g] = true;
    best = std::max(best, 1 + BestMatching(gold, pred, k + 1, used));
    used[g] = false;
  }
  return best;
}

inline MatchCounts BruteForceCounts(const std::vector<std::vector<EntitySpan>> &gold,
                                    const std::vector<std::vector<EntitySpan>> &pred) {
  MatchCounts c;
  for (size_t s = 0; s < gold.size(); ++s) {
    std::vector<bool> used(gold[s].size(), false);
    const int tp = BestMatching(gold[s], pred[s], 0, used);
    c.tp += tp;
    c.fp += static_cast<std::int64_t>(pred[s].size()) - tp;
    c.fn += static_cast<std::int64_t>(gold[s].size()) - tp;
  }
  return c;
}

// Gold spans from random tags; predictions from a corrupted copy.
inline std::pair<std::vector<EntitySpan>, std::vector<EntitySpan>> RandomSpanPair(
    std::mt19937_64 &rng, int max_len = 6) {
  const int n = 1 + static_cast<int>(rng() % max_len);
  auto gold = RandomTags(rng, n);
  auto pred = gold;
  const int edits = static_cast<int>(rng() % 4);
  for (int e = 0; e < edits; ++e) pred[rng() % n] = static_cast<int>(rng() % kNumNerLabels);
  if (rng() % 5 == 0) pred = RandomTags(rng, n);
  return {ExtractEntities(gold), ExtractEntities(RepairBio2(pred))};
}

struct BreCase {
  std::vector<EntitySpan> gold;
  std::vector<EntitySpan> pred;
  std::int64_t errors;
  std::int64_t predicted;
};

inline const std::vector<BreCase> &BreTable() {
  static const std::vector<BreCase> kCases = {
      {{{0, 2, kSpanPer}}, {{0, 1, kSpanPer}}, 1, 1},
      {{{0, 1, kSpanPer}}, {{0, 1, kSpanPer}}, 0, 1},
      {{{0, 1, kSpanPer}}, {{0, 1, kSpanLoc}}, 0, 1},
      {{}, {}, 0, 0},
      {{{0, 1, kSpanPer}}, {{3, 4, kSpanPer}}, 0, 1},
      {{{1, 3, kSpanOrg}}, {{0, 4, kSpanOrg}}, 1, 1},
      {{{0, 0, kSpanPer}, {2, 2, kSpanPer}}, {{0, 2, kSpanPer}}, 1, 1},
      {{{0, 1, kSpanPer}, {3, 4, kSpanLoc}}, {{0, 1, kSpanPer}, {3, 3, kSpanLoc}}, 1, 2},
      {{{0, 3, kSpanLoc}}, {{0, 1, kSpanLoc}, {2, 3, kSpanLoc}}, 2, 2},
      {{{2, 2, kSpanOrg}}, {{0, 0, kSpanPer}, {2, 2, kSpanOrg}, {4, 5, kSpanLoc}}, 0, 3},
  };
  return kCases;
}

}  // namespace mtbr::testing

#endif  // MTBR_TESTS_ORACLES_H_
