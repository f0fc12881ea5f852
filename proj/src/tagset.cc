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

#include "mtbr/tagset.h"

#include "mtbr/error.h"

namespace mtbr {

std::optional<int> ParseNerLabel(std::string_view name) {
  for (int i = 0; i < kNumNerLabels; ++i) {
    if (kNerLabelNames[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<int> ParseSpanTag(std::string_view name) {
  for (int i = 0; i < kNumSpanTags; ++i) {
    if (kSpanTagNames[i] == name) return i;
  }
  return std::nullopt;
}

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownTag: return "UnknownTag";
    case ErrorCode::kIllegalTransition: return "IllegalTransition";
    case ErrorCode::kEmptySentence: return "EmptySentence";
    case ErrorCode::kTooFewSentences: return "TooFewSentences";
    case ErrorCode::kRuleConflict: return "RuleConflict";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kInvalidTags: return "InvalidTags";
    case ErrorCode::kDuplicateAuditor: return "DuplicateAuditor";
    case ErrorCode::kAlreadyResolved: return "AlreadyResolved";
    case ErrorCode::kStaleVersion: return "StaleVersion";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kPrecondition: return "PreconditionFailed";
  }
  return "Unknown";
}

}  // namespace mtbr
