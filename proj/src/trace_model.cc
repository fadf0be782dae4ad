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

#include "affinity/trace_model.h"

#include <cmath>
#include <limits>

#include "affinity/status.h"
#include "affinity/text.h"

namespace affinity {

namespace {

[[noreturn]] void Malformed(const std::string& why) {
  Fail(ErrorCode::kMalformedLine, why);
}

bool HasForbiddenChar(std::string_view text) {
  return text.find_first_of(";,\r\n") != std::string_view::npos;
}

std::uint64_t ParseTimestamp(std::string_view field) {
  auto ts = ParseUint64(field);
  if (!ts) Malformed("bad timestamp '" + std::string(field) + "'");
  return *ts;
}

AttributeMap ParseAttributes(std::string_view field) {
  AttributeMap attributes;
  if (field.empty()) return attributes;
  for (std::string_view item : Split(field, ';')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) Malformed("attribute without '='");
    std::string_view name = item.substr(0, eq);
    if (!IsValidAttributeName(name)) {
      Malformed("bad attribute name '" + std::string(name) + "'");
    }
    AttributeValue value = ParseTaggedValue(item.substr(eq + 1));
    if (!attributes.emplace(std::string(name), std::move(value)).second) {
      Malformed("duplicate attribute '" + std::string(name) + "'");
    }
  }
  return attributes;
}

ConstraintOp ParseOp(std::string_view token) {
  if (token == "EQ") return ConstraintOp::kEqual;
  if (token == "NE") return ConstraintOp::kNotEqual;
  if (token == "LT") return ConstraintOp::kLessThan;
  if (token == "GE") return ConstraintOp::kGreaterEqual;
  if (token == "GT") return ConstraintOp::kGreaterThan;
  if (token == "LE") return ConstraintOp::kLessEqual;
  Fail(ErrorCode::kUnknownOperator, "operator '" + std::string(token) + "'");
}

std::vector<RawConstraint> ParseConstraints(std::string_view field) {
  std::vector<RawConstraint> constraints;
  if (field.empty()) return constraints;
  for (std::string_view item : Split(field, ';')) {
    auto parts = Split(item, ',');
    if (parts.size() != 3) Malformed("constraint needs name,op,value");
    if (!IsValidAttributeName(parts[0])) {
      Malformed("bad attribute name '" + std::string(parts[0]) + "'");
    }
    RawConstraint c;
    c.attribute = std::string(parts[0]);
    c.op = ParseOp(parts[1]);
    c.value = ParseTaggedValue(parts[2]);
    constraints.push_back(std::move(c));
  }
  return constraints;
}

double ParseFraction(std::string_view field, const char* what) {
  auto value = ParseDouble(field);
  if (!value) Malformed(std::string("bad ") + what + " '" + std::string(field) + "'");
  if (!std::isfinite(*value) || *value < 0.0 || *value > 1.0) {
    Fail(ErrorCode::kValueOutOfRange,
         std::string(what) + " " + std::string(field) + " outside [0,1]");
  }
  return *value;
}

std::string FormatAttributes(const AttributeMap& attributes) {
  std::string out;
  for (const auto& [name, value] : attributes) {
    if (!out.empty()) out += ';';
    out += name;
    out += '=';
    out += FormatTaggedValue(value);
  }
  return out;
}

std::string FormatConstraints(const std::vector<RawConstraint>& constraints) {
  std::string out;
  for (const RawConstraint& c : constraints) {
    if (!out.empty()) out += ';';
    out += c.attribute;
    out += ',';
    out += ConstraintOpToken(c.op);
    out += ',';
    out += FormatTaggedValue(c.value);
  }
  return out;
}

}  // namespace

AttributeValue AttributeValue::Text(std::string value) {
  if (!IsValidTextValue(value)) {
    Fail(ErrorCode::kInvalidArgument, "invalid text value '" + value + "'");
  }
  return AttributeValue(std::move(value));
}

bool IsValidTextValue(std::string_view text) {
  return !text.empty() && !HasForbiddenChar(text);
}

bool IsValidAttributeName(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(name[0])) return false;
  for (char c : name.substr(1)) {
    if (!alpha(c) && !digit(c) && c != '_') return false;
  }
  return true;
}

bool IsValidNodeId(std::string_view id) {
  return !id.empty() && !HasForbiddenChar(id);
}

std::string FormatTaggedValue(const AttributeValue& value) {
  switch (value.kind()) {
    case AttributeValue::Kind::kInteger: return "i:" + std::to_string(value.integer());
    case AttributeValue::Kind::kText: return "s:" + value.text();
    case AttributeValue::Kind::kEmpty: return "e:";
  }
  return "e:";
}

AttributeValue ParseTaggedValue(std::string_view text) {
  if (text.size() < 2 || text[1] != ':') {
    Malformed("bad tagged value '" + std::string(text) + "'");
  }
  std::string_view payload = text.substr(2);
  switch (text[0]) {
    case 'i': {
      auto v = ParseInt64(payload);
      if (!v) Malformed("bad integer '" + std::string(payload) + "'");
      return AttributeValue::Integer(*v);
    }
    case 's':
      if (!IsValidTextValue(payload)) Malformed("bad text value '" + std::string(payload) + "'");
      return AttributeValue::Text(std::string(payload));
    case 'e':
      if (!payload.empty()) Malformed("empty value with payload");
      return AttributeValue::Empty();
    default:
      Malformed("unknown value tag '" + std::string(1, text[0]) + "'");
  }
}

std::string_view ConstraintOpToken(ConstraintOp op) {
  switch (op) {
    case ConstraintOp::kEqual: return "EQ";
    case ConstraintOp::kNotEqual: return "NE";
    case ConstraintOp::kLessThan: return "LT";
    case ConstraintOp::kGreaterEqual: return "GE";
    case ConstraintOp::kGreaterThan: return "GT";
    case ConstraintOp::kLessEqual: return "LE";
  }
  return "EQ";
}

TraceEvent ParseNodeEvent(std::string_view line) {
  auto fields = Split(line, ',');
  if (fields.size() != 4) Malformed("nodes line needs 4 fields");
  TraceEvent event;
  event.timestamp = ParseTimestamp(fields[0]);
  std::string_view tag = fields[1];
  std::string_view id = fields[2];
  if (!IsValidNodeId(id)) Malformed("bad node id '" + std::string(id) + "'");
  if (tag == "REMOVE") {
    if (!fields[3].empty()) Malformed("REMOVE carries attributes");
    event.payload = NodeRemove{std::string(id)};
    return event;
  }
  Node node{std::string(id), ParseAttributes(fields[3])};
  if (tag == "ADD") {
    event.payload = NodeAdd{std::move(node)};
  } else if (tag == "UPDATE") {
    event.payload = NodeUpdate{std::move(node)};
  } else {
    Malformed("bad node event '" + std::string(tag) + "'");
  }
  return event;
}

TraceEvent ParseTaskEvent(std::string_view line) {
  // The constraints field contains commas itself, so it is the remainder
  // after the first six fields.
  auto fields = SplitPrefix(line, ',', 6);
  if (!fields) Malformed("tasks line needs 7 fields");
  const auto& f = *fields;
  TraceEvent event;
  event.timestamp = ParseTimestamp(f[0]);
  std::string_view tag = f[1];
  auto job = ParseUint64(f[2]);
  auto index = ParseUint64(f[3]);
  if (!job) Malformed("bad job id '" + std::string(f[2]) + "'");
  if (!index || *index > std::numeric_limits<std::uint32_t>::max()) {
    Malformed("bad task index '" + std::string(f[3]) + "'");
  }
  if (tag == "FINISH") {
    if (!f[4].empty() || !f[5].empty() || !f[6].empty()) {
      Malformed("FINISH carries resources or constraints");
    }
    event.payload = TaskFinish{TaskKey{*job, static_cast<std::uint32_t>(*index)}};
    return event;
  }
  if (tag != "SUBMIT" && tag != "UPDATE") {
    Malformed("bad task event '" + std::string(tag) + "'");
  }
  TaskSpec task;
  task.job_id = *job;
  task.task_index = static_cast<std::uint32_t>(*index);
  task.cpu = ParseFraction(f[4], "cpu");
  task.mem = ParseFraction(f[5], "mem");
  task.constraints = ParseConstraints(f[6]);
  if (tag == "SUBMIT") {
    event.payload = TaskSubmit{std::move(task)};
  } else {
    event.payload = TaskUpdate{std::move(task)};
  }
  return event;
}

std::string FormatNodeEvent(const TraceEvent& event) {
  std::string out = std::to_string(event.timestamp);
  if (const auto* add = std::get_if<NodeAdd>(&event.payload)) {
    out += ",ADD," + add->node.id + "," + FormatAttributes(add->node.attributes);
  } else if (const auto* update = std::get_if<NodeUpdate>(&event.payload)) {
    out += ",UPDATE," + update->node.id + "," + FormatAttributes(update->node.attributes);
  } else if (const auto* remove = std::get_if<NodeRemove>(&event.payload)) {
    out += ",REMOVE," + remove->node_id + ",";
  } else {
    Fail(ErrorCode::kInvalidArgument, "not a node event");
  }
  return out;
}

std::string FormatTaskEvent(const TraceEvent& event) {
  std::string out = std::to_string(event.timestamp);
  auto spec_fields = [](const TaskSpec& t) {
    return std::to_string(t.job_id) + "," + std::to_string(t.task_index) + "," +
           FormatDouble(t.cpu) + "," + FormatDouble(t.mem) + "," +
           FormatConstraints(t.constraints);
  };
  if (const auto* submit = std::get_if<TaskSubmit>(&event.payload)) {
    out += ",SUBMIT," + spec_fields(submit->task);
  } else if (const auto* update = std::get_if<TaskUpdate>(&event.payload)) {
    out += ",UPDATE," + spec_fields(update->task);
  } else if (const auto* finish = std::get_if<TaskFinish>(&event.payload)) {
    out += ",FINISH," + std::to_string(finish->key.job_id) + "," +
           std::to_string(finish->key.task_index) + ",,,";
  } else {
    Fail(ErrorCode::kInvalidArgument, "not a task event");
  }
  return out;
}

}  // namespace affinity
