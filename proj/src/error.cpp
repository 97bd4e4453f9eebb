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

#include "mtrd/error.hpp"

namespace mtrd {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNegativeMass: return "NegativeMass";
    case ErrorCode::kSumNotOne: return "SumNotOne";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kUnknownVariable: return "UnknownVariable";
    case ErrorCode::kAllMassZero: return "AllMassZero";
    case ErrorCode::kAlphabetMismatch: return "AlphabetMismatch";
    case ErrorCode::kMissingBlocklength: return "MissingBlocklength";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kUndefinedDensity: return "UndefinedDensity";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kEmptySubset: return "EmptySubset";
    case ErrorCode::kFactorizationViolated: return "FactorizationViolated";
    case ErrorCode::kInfeasibleDistortion: return "InfeasibleDistortion";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace mtrd
