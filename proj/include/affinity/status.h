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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affinity {

/// Typed failure categories. Every error raised by the library carries one of
/// these so that callers (and the CLI's `error=<Code>` line) can dispatch on it.
enum class ErrorCode {
  kMalformedLine,
  kNonMonotonicTimestamp,
  kValueOutOfRange,
  kUnknownOperator,
  kInfeasibleConfig,
  kTypeMismatch,
  kUnsatisfiable,
  kStaleEvent,
  kUnknownNode,
  kUnknownTask,
  kInvalidCount,
  kEmptyDataset,
  kUnknownCategory,
  kIOFailure,
  kFormatVersionMismatch,
  kChecksumMismatch,
  kDegenerateData,
  kNonFiniteLoss,
  kWidthMismatch,
  kTooFewRows,
  kLengthMismatch,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace affinity
