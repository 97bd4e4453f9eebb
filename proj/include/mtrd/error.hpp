// Copyright 2026 The mtrd Authors. All Rights Reserved.
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

#ifndef MTRD_ERROR_HPP_
#define MTRD_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtrd {

enum class ErrorCode {
  kNegativeMass,
  kSumNotOne,
  kShapeMismatch,
  kUnknownVariable,
  kAllMassZero,
  kAlphabetMismatch,
  kMissingBlocklength,
  kBudgetExceeded,
  kUndefinedDensity,
  kEmptyGrid,
  kEmptySubset,
  kFactorizationViolated,
  kInfeasibleDistortion,
  kInvalidArgument,
  kParseError,
};

std::string_view ErrorName(ErrorCode code);

// All library failures are reported through this type. The code is stable and
// is what the CLI maps to exit codes and error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mtrd

#endif  // MTRD_ERROR_HPP_
