// Copyright 2026 The Affinity Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "affinity/status.h"

namespace affinity {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kNonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::kValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::kUnknownOperator: return "UnknownOperator";
    case ErrorCode::kInfeasibleConfig: return "InfeasibleConfig";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kUnsatisfiable: return "Unsatisfiable";
    case ErrorCode::kStaleEvent: return "StaleEvent";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kInvalidCount: return "InvalidCount";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kIOFailure: return "IOFailure";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kWidthMismatch: return "WidthMismatch";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace affinity
