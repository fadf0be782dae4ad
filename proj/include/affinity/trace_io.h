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

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>

#include "affinity/trace_model.h"

namespace affinity {

enum class TraceKind { kNodes, kTasks };

/// Streams events from one trace file. Validates the header and that
/// timestamps never decrease (Error kNonMonotonicTimestamp). Errors carry the
/// 1-based line number in their message.
class TraceReader {
 public:
  TraceReader(std::istream& in, TraceKind kind);

  std::optional<TraceEvent> Next();
  std::size_t line_number() const { return line_number_; }

 private:
  std::istream& in_;
  TraceKind kind_;
  std::size_t line_number_ = 0;
  std::uint64_t last_timestamp_ = 0;
  bool header_read_ = false;
};

/// Merges a nodes stream and a tasks stream in timestamp order. At equal
/// timestamps node events come first; within one file, file order is kept.
class MergedTraceReader {
 public:
  MergedTraceReader(std::istream& nodes, std::istream& tasks);

  std::optional<TraceEvent> Next();

 private:
  TraceReader nodes_;
  TraceReader tasks_;
  std::optional<TraceEvent> pending_node_;
  std::optional<TraceEvent> pending_task_;
  bool primed_ = false;
};

/// Header plus one canonical line per event, LF terminated.
std::string WriteTrace(std::span<const TraceEvent> events, TraceKind kind);

}  // namespace affinity
