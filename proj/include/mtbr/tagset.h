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

#ifndef MTBR_TAGSET_H_
#define MTBR_TAGSET_H_

#include <array>
#include <optional>
#include <string_view>

namespace mtbr {

// NER label indices. The order is global: every 7-way probability vector in
// the project is laid out exactly like this.
enum NerLabel : int {
  kBPer = 0,
  kIPer = 1,
  kBLoc = 2,
  kILoc = 3,
  kBOrg = 4,
  kIOrg = 5,
  kO = 6,
};

// Span tag indices used by boundary targets and span classification.
enum SpanTag : int {
  kSpanPer = 0,
  kSpanLoc = 1,
  kSpanOrg = 2,
  kSpanO = 3,
};

inline constexpr int kNumNerLabels = 7;
inline constexpr int kNumSpanTags = 4;
inline constexpr int kNumEntityTypes = 3;

inline constexpr std::array<std::string_view, kNumNerLabels> kNerLabelNames = {
    "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG", "O"};
inline constexpr std::array<std::string_view, kNumSpanTags> kSpanTagNames = {
    "PER", "LOC", "ORG", "O"};

std::optional<int> ParseNerLabel(std::string_view name);
std::optional<int> ParseSpanTag(std::string_view name);

inline constexpr bool IsBegin(int label) { return label != kO && label % 2 == 0; }
inline constexpr bool IsInside(int label) { return label != kO && label % 2 == 1; }

// Entity type (a SpanTag other than O) of a B-/I- label; kSpanO for O.
inline constexpr int LabelType(int label) {
  return label == kO ? kSpanO : label / 2;
}
inline constexpr int BeginLabel(int type) { return 2 * type; }
inline constexpr int InsideLabel(int type) { return 2 * type + 1; }

}  // namespace mtbr

#endif  // MTBR_TAGSET_H_
