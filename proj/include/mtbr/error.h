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

#ifndef MTBR_ERROR_H_
#define MTBR_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtbr {

enum class ErrorCode {
  kUnknownTag,
  kIllegalTransition,
  kEmptySentence,
  kTooFewSentences,
  kRuleConflict,
  kShapeMismatch,
  kDegenerateInput,
  kNonFiniteLoss,
  kInvalidTags,
  kDuplicateAuditor,
  kAlreadyResolved,
  kStaleVersion,
  kNotFound,
  kBadConfig,
  kIo,
  kPrecondition,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures in the library are reported with this exception.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mtbr

#endif  // MTBR_ERROR_H_
