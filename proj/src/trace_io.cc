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

#include "affinity/trace_io.h"

#include "affinity/status.h"

namespace affinity {

TraceReader::TraceReader(std::istream& in, TraceKind kind) : in_(in), kind_(kind) {}

std::optional<TraceEvent> TraceReader::Next() {
  std::string line;
  const std::string_view header = kind_ == TraceKind::kNodes ? kNodesHeader : kTasksHeader;
  if (!header_read_) {
    if (!std::getline(in_, line)) {
      Fail(ErrorCode::kMalformedLine, "line 1: missing header");
    }
    line_number_ = 1;
    if (line != header) Fail(ErrorCode::kMalformedLine, "line 1: unexpected header");
    header_read_ = true;
  }
  if (!std::getline(in_, line)) return std::nullopt;
  ++line_number_;
  try {
    TraceEvent event =
        kind_ == TraceKind::kNodes ? ParseNodeEvent(line) : ParseTaskEvent(line);
    if (event.timestamp < last_timestamp_) {
      Fail(ErrorCode::kNonMonotonicTimestamp,
           std::to_string(event.timestamp) + " after " + std::to_string(last_timestamp_));
    }
    last_timestamp_ = event.timestamp;
    return event;
  } catch (const Error& e) {
    throw Error(e.code(), "line " + std::to_string(line_number_) + ": " + e.detail());
  }
}

MergedTraceReader::MergedTraceReader(std::istream& nodes, std::istream& tasks)
    : nodes_(nodes, TraceKind::kNodes), tasks_(tasks, TraceKind::kTasks) {}

std::optional<TraceEvent> MergedTraceReader::Next() {
  if (!primed_) {
    pending_node_ = nodes_.Next();
    pending_task_ = tasks_.Next();
    primed_ = true;
  }
  std::optional<TraceEvent> out;
  if (pending_node_ &&
      (!pending_task_ || pending_node_->timestamp <= pending_task_->timestamp)) {
    out = std::move(pending_node_);
    pending_node_ = nodes_.Next();
  } else if (pending_task_) {
    out = std::move(pending_task_);
    pending_task_ = tasks_.Next();
  }
  return out;
}

std::string WriteTrace(std::span<const TraceEvent> events, TraceKind kind) {
  std::string out(kind == TraceKind::kNodes ? kNodesHeader : kTasksHeader);
  out += '\n';
  for (const TraceEvent& e : events) {
    out += kind == TraceKind::kNodes ? FormatNodeEvent(e) : FormatTaskEvent(e);
    out += '\n';
  }
  return out;
}

}  // namespace affinity
