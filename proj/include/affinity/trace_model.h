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

// Trace domain types: node attributes, task placement constraints and the
// timestamped events of the node and task trace files.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace affinity {

struct EmptyValue {
  auto operator<=>(const EmptyValue&) const = default;
};

/// A node attribute value or constraint operand. Integer and Text never
/// compare equal to each other, even when the text spells the integer.
/// Ordering is by variant (Integer < Text < Empty) and then by value.
class AttributeValue {
 public:
  enum class Kind { kInteger = 0, kText = 1, kEmpty = 2 };

  AttributeValue() : value_(EmptyValue{}) {}

  static AttributeValue Integer(std::int64_t value) { return AttributeValue(value); }
  /// Throws Error(kInvalidArgument) for empty text or text containing
  /// `;`, `,`, CR or LF.
  static AttributeValue Text(std::string value);
  static AttributeValue Empty() { return AttributeValue(); }

  Kind kind() const { return static_cast<Kind>(value_.index()); }
  bool is_integer() const { return kind() == Kind::kInteger; }
  bool is_text() const { return kind() == Kind::kText; }
  bool is_empty() const { return kind() == Kind::kEmpty; }

  std::int64_t integer() const { return std::get<std::int64_t>(value_); }
  const std::string& text() const { return std::get<std::string>(value_); }

  auto operator<=>(const AttributeValue&) const = default;
  bool operator==(const AttributeValue&) const = default;

 private:
  explicit AttributeValue(std::int64_t value) : value_(value) {}
  explicit AttributeValue(std::string value) : value_(std::move(value)) {}

  std::variant<std::int64_t, std::string, EmptyValue> value_;
};

/// `i:<int>`, `s:<text>` or `e:`.
std::string FormatTaggedValue(const AttributeValue& value);
/// Inverse of FormatTaggedValue; throws Error(kMalformedLine).
AttributeValue ParseTaggedValue(std::string_view text);

bool IsValidTextValue(std::string_view text);
/// `[A-Za-z][A-Za-z0-9_]*`
bool IsValidAttributeName(std::string_view name);
bool IsValidNodeId(std::string_view id);

using AttributeMap = std::map<std::string, AttributeValue, std::less<>>;

struct Node {
  std::string id;
  AttributeMap attributes;

  const AttributeValue* Find(std::string_view attribute) const {
    auto it = attributes.find(attribute);
    return it == attributes.end() ? nullptr : &it->second;
  }

  bool operator==(const Node&) const = default;
};

enum class ConstraintOp {
  kEqual,
  kNotEqual,
  kLessThan,
  kGreaterEqual,
  // Accepted on ingest only; normalization rewrites them.
  kGreaterThan,
  kLessEqual,
};

std::string_view ConstraintOpToken(ConstraintOp op);

struct RawConstraint {
  std::string attribute;
  ConstraintOp op = ConstraintOp::kEqual;
  AttributeValue value;

  bool operator==(const RawConstraint&) const = default;
};

struct TaskKey {
  std::uint64_t job_id = 0;
  std::uint32_t task_index = 0;

  auto operator<=>(const TaskKey&) const = default;
  bool operator==(const TaskKey&) const = default;
};

struct TaskKeyHash {
  std::size_t operator()(const TaskKey& key) const {
    return std::hash<std::uint64_t>()(key.job_id * 0x9e3779b97f4a7c15ULL ^ key.task_index);
  }
};

struct TaskSpec {
  std::uint64_t job_id = 0;
  std::uint32_t task_index = 0;
  double cpu = 0.0;
  double mem = 0.0;
  std::vector<RawConstraint> constraints;

  TaskKey key() const { return {job_id, task_index}; }
  bool operator==(const TaskSpec&) const = default;
};

struct NodeAdd {
  Node node;
  bool operator==(const NodeAdd&) const = default;
};
/// Replaces the node's whole attribute mapping.
struct NodeUpdate {
  Node node;
  bool operator==(const NodeUpdate&) const = default;
};
struct NodeRemove {
  std::string node_id;
  bool operator==(const NodeRemove&) const = default;
};
struct TaskSubmit {
  TaskSpec task;
  bool operator==(const TaskSubmit&) const = default;
};
struct TaskUpdate {
  TaskSpec task;
  bool operator==(const TaskUpdate&) const = default;
};
struct TaskFinish {
  TaskKey key;
  bool operator==(const TaskFinish&) const = default;
};

using EventPayload =
    std::variant<NodeAdd, NodeUpdate, NodeRemove, TaskSubmit, TaskUpdate, TaskFinish>;

struct TraceEvent {
  std::uint64_t timestamp = 0;  // microseconds
  EventPayload payload;

  bool is_node_event() const { return payload.index() <= 2; }
  bool operator==(const TraceEvent&) const = default;
};

inline constexpr std::string_view kNodesHeader = "timestamp,event,node_id,attributes";
inline constexpr std::string_view kTasksHeader =
    "timestamp,event,job_id,task_index,cpu,mem,constraints";

/// Decodes one nodes-trace data line. Throws Error(kMalformedLine).
TraceEvent ParseNodeEvent(std::string_view line);
/// Decodes one tasks-trace data line. Throws Error with kMalformedLine,
/// kValueOutOfRange or kUnknownOperator.
TraceEvent ParseTaskEvent(std::string_view line);

/// Canonical line for a node event: attributes sorted by name.
std::string FormatNodeEvent(const TraceEvent& event);
/// Canonical line for a task event: constraints in stored order.
std::string FormatTaskEvent(const TraceEvent& event);

}  // namespace affinity
