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


#include "affinity/matcher.h"

#include <algorithm>
#include <sstream>
#include <type_traits>

#include "affinity/status.h"

namespace affinity {

namespace {

std::string DescribeKey(const TaskKey& key) {
  return std::to_string(key.job_id) + "/" + std::to_string(key.task_index);
}

std::string GroupKey(const CompactedConstraintSet& constraints) {
  std::string key;
  for (const std::string& label : CanonicalLabels(constraints)) {
    key += label;
    key += '\n';
  }
  return key;
}

}  // namespace

GroupLabel GroupLabel::FromLetter(char letter) {
  if (letter < 'A' || letter > 'Z') {
    Fail(ErrorCode::kInvalidArgument, std::string("group label out of range: ") + letter);
  }
  return GroupLabel(letter);
}

GroupLabel ClassifyGroup(std::int64_t count) {
  if (count <= 0) {
    Fail(ErrorCode::kInvalidCount, "suitable node count must be positive, got " +
                                       std::to_string(count));
  }
  if (count == 1) return GroupLabel::FromLetter('A');
  if (count > 12000) return GroupLabel::FromLetter('Z');
  return GroupLabel::FromLetter(static_cast<char>(66 + (count - 1) / 500));
}

std::uint64_t BruteForceCount(std::span<const Node> nodes,
                              const CompactedConstraintSet& constraints) {
  std::uint64_t count = 0;
  for (const Node& node : nodes) {
    if (Matches(node, constraints)) ++count;
  }
  return count;
}

ClusterState::ClusterState(MatcherOptions options) : options_(options) {}

void ClusterState::Reject(ErrorCode code, std::uint64_t& counter, const std::string& message) {
  if (options_.strict) Fail(code, message);
  ++counter;
}

void ClusterState::Apply(const TraceEvent& event) {
  if (event.timestamp < clock_) {
    Reject(ErrorCode::kStaleEvent, diagnostics_.stale_events,
           "event at " + std::to_string(event.timestamp) + " precedes clock " +
               std::to_string(clock_));
    return;
  }
  std::visit(
      [&](const auto& payload) {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, NodeAdd>) {
          ApplyNodeAdd(payload.node);
        } else if constexpr (std::is_same_v<T, NodeUpdate>) {
          ApplyNodeUpdate(payload.node);
        } else if constexpr (std::is_same_v<T, NodeRemove>) {
          ApplyNodeRemove(payload.node_id);
        } else if constexpr (std::is_same_v<T, TaskSubmit>) {
          ApplyTaskSubmit(payload.task, false);
        } else if constexpr (std::is_same_v<T, TaskUpdate>) {
          ApplyTaskSubmit(payload.task, true);
        } else {
          ApplyTaskFinish(payload.key);
        }
      },
      event.payload);
  clock_ = event.timestamp;
}

std::uint32_t ClusterState::InternAttribute(const std::string& name) {
  auto [it, inserted] =
      attribute_ids_.emplace(name, static_cast<std::uint32_t>(attribute_ids_.size()));
  return it->second;
}

void ClusterState::FillSlot(std::uint32_t slot_id, const Node& node) {
  Slot& slot = slots_[slot_id];
  slot.used = true;
  slot.node = node;
  for (const auto& [name, value] : slot.node.attributes) InternAttribute(name);
  slot.values.assign(attribute_ids_.size(), nullptr);
  for (const auto& [name, value] : slot.node.attributes) {
    slot.values[attribute_ids_.at(name)] = &value;
  }
}

bool ClusterState::Evaluate(const ConstraintGroup& group, const Slot& slot) {
  ++match_evaluations_;
  for (const CompiledEntry& entry : group.compiled) {
    const AttributeValue* value =
        entry.attribute_id < slot.values.size() ? slot.values[entry.attribute_id] : nullptr;
    if (!Satisfies(value, *entry.constraint)) return false;
  }
  return true;
}

void ClusterState::ReevaluateSlot(std::uint32_t slot_id) {
  const Slot& slot = slots_[slot_id];
  for (ConstraintGroup& group : groups_) {
    if (group.refs == 0) continue;
    const bool was = group.members.test(slot_id);
    const bool now = slot.used && Evaluate(group, slot);
    if (was == now) continue;
    group.members.set(slot_id, now);
    if (now) {
      ++group.count;
    } else if (--group.count == 0) {
      diagnostics_.orphaned_transitions += group.refs;
    }
  }
}

void ClusterState::ApplyNodeAdd(const Node& node) {
  if (node_slots_.count(node.id) > 0) {
    Reject(ErrorCode::kInvalidArgument, diagnostics_.duplicate_node,
           "node already present: " + node.id);
    ApplyNodeUpdate(node);
    return;
  }
  std::uint32_t slot_id;
  if (!free_slots_.empty()) {
    slot_id = free_slots_.back();
    free_slots_.pop_back();
  } else {
    slot_id = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
    for (ConstraintGroup& group : groups_) group.members.resize(slots_.size());
  }
  FillSlot(slot_id, node);
  node_slots_.emplace(node.id, slot_id);
  ReevaluateSlot(slot_id);
}

void ClusterState::ApplyNodeUpdate(const Node& node) {
  auto it = node_slots_.find(node.id);
  if (it == node_slots_.end()) {
    Reject(ErrorCode::kUnknownNode, diagnostics_.unknown_node, "update of absent node " + node.id);
    return;
  }
  FillSlot(it->second, node);
  ReevaluateSlot(it->second);
}

void ClusterState::ApplyNodeRemove(const std::string& id) {
  auto it = node_slots_.find(id);
  if (it == node_slots_.end()) {
    Reject(ErrorCode::kUnknownNode, diagnostics_.unknown_node, "removal of absent node " + id);
    return;
  }
  const std::uint32_t slot_id = it->second;
  node_slots_.erase(it);
  Slot& slot = slots_[slot_id];
  slot.used = false;
  slot.node = Node{};
  slot.values.clear();
  for (ConstraintGroup& group : groups_) {
    if (group.refs == 0 || !group.members.test(slot_id)) continue;
    group.members.reset(slot_id);
    if (--group.count == 0) diagnostics_.orphaned_transitions += group.refs;
  }
  free_slots_.push_back(slot_id);
}

std::uint32_t ClusterState::AcquireGroup(CompactedConstraintSet constraints) {
  std::string key = GroupKey(constraints);
  if (auto it = group_index_.find(key); it != group_index_.end()) {
    ++groups_[it->second].refs;
    return it->second;
  }
  std::uint32_t id;
  if (!free_groups_.empty()) {
    id = free_groups_.back();
    free_groups_.pop_back();
  } else {
    id = static_cast<std::uint32_t>(groups_.size());
    groups_.emplace_back();
  }
  ConstraintGroup& group = groups_[id];
  group.constraints = std::move(constraints);
  group.compiled.clear();
  for (const auto& [attribute, c] : group.constraints.entries) {
    group.compiled.push_back({InternAttribute(attribute), &c});
  }
  group.members.clear();
  group.members.resize(slots_.size());
  group.count = 0;
  group.refs = 1;
  for (std::uint32_t s = 0; s < slots_.size(); ++s) {
    if (slots_[s].used && Evaluate(group, slots_[s])) {
      group.members.set(s);
      ++group.count;
    }
  }
  group.key = key;
  group_index_.emplace(std::move(key), id);
  return id;
}

void ClusterState::ReleaseGroup(std::uint32_t id) {
  ConstraintGroup& group = groups_[id];
  if (--group.refs > 0) return;
  group_index_.erase(group.key);
  group.constraints = CompactedConstraintSet{};
  group.compiled.clear();
  group.members.clear();
  group.count = 0;
  group.key.clear();
  free_groups_.push_back(id);
}

void ClusterState::ApplyTaskSubmit(const TaskSpec& spec, bool is_update) {
  const TaskKey key = spec.key();
  auto live = tasks_.find(key);
  const bool known = live != tasks_.end() || dropped_.count(key) > 0;
  if (is_update && !known) {
    Reject(ErrorCode::kUnknownTask, diagnostics_.unknown_task,
           "update of absent task " + DescribeKey(key));
    return;
  }
  if (!is_update && live != tasks_.end()) {
    Reject(ErrorCode::kInvalidArgument, diagnostics_.duplicate_task,
           "task already live: " + DescribeKey(key));
  }

  CompactedConstraintSet constraints;
  try {
    constraints = NormalizeAndCompact(spec.constraints);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kTypeMismatch) {
      Reject(ErrorCode::kTypeMismatch, diagnostics_.type_mismatch_tasks,
             "task " + DescribeKey(key) + ": " + e.detail());
    } else if (e.code() == ErrorCode::kUnsatisfiable) {
      ++diagnostics_.unsatisfiable_tasks;
    } else {
      throw;
    }
    if (live != tasks_.end()) {
      ReleaseGroup(live->second.group);
      tasks_.erase(live);
    }
    dropped_[key] = spec;
    return;
  }

  const std::uint32_t group = AcquireGroup(std::move(constraints));
  if (live != tasks_.end()) {
    ReleaseGroup(live->second.group);
    live->second = LiveTask{spec, group};
  } else {
    dropped_.erase(key);
    tasks_.emplace(key, LiveTask{spec, group});
  }
  if (groups_[group].count == 0) ++diagnostics_.orphaned_transitions;
}

void ClusterState::ApplyTaskFinish(const TaskKey& key) {
  auto live = tasks_.find(key);
  if (live == tasks_.end()) {
    if (dropped_.erase(key) == 0) {
      Reject(ErrorCode::kUnknownTask, diagnostics_.unknown_task,
             "finish of absent task " + DescribeKey(key));
    }
    return;
  }
  ReleaseGroup(live->second.group);
  tasks_.erase(live);
}

const Node* ClusterState::FindNode(std::string_view id) const {
  auto it = node_slots_.find(id);
  return it == node_slots_.end() ? nullptr : &slots_[it->second].node;
}

std::vector<Node> ClusterState::Nodes() const {
  std::vector<Node> nodes;
  nodes.reserve(node_slots_.size());
  for (const auto& [id, slot] : node_slots_) nodes.push_back(slots_[slot].node);
  return nodes;
}

std::vector<TaskKey> ClusterState::LiveTasks() const {
  std::vector<TaskKey> keys;
  keys.reserve(tasks_.size());
  for (const auto& [key, task] : tasks_) keys.push_back(key);
  return keys;
}

const TaskSpec* ClusterState::FindTask(const TaskKey& key) const {
  auto it = tasks_.find(key);
  return it == tasks_.end() ? nullptr : &it->second.spec;
}

const CompactedConstraintSet* ClusterState::Constraints(const TaskKey& key) const {
  auto it = tasks_.find(key);
  return it == tasks_.end() ? nullptr : &groups_[it->second.group].constraints;
}

std::optional<std::uint64_t> ClusterState::SuitableCount(const TaskKey& key) const {
  auto it = tasks_.find(key);
  if (it == tasks_.end()) return std::nullopt;
  return groups_[it->second.group].count;
}

std::vector<std::string> ClusterState::SuitableNodes(const TaskKey& key) const {
  std::vector<std::string> ids;
  auto it = tasks_.find(key);
  if (it == tasks_.end()) return ids;
  const ConstraintGroup& group = groups_[it->second.group];
  for (auto s = group.members.find_first(); s != group.members.npos;
       s = group.members.find_next(s)) {
    ids.push_back(slots_[s].node.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<TaskKey> ClusterState::OrphanedTasks() const {
  std::vector<TaskKey> keys;
  for (const auto& [key, task] : tasks_) {
    if (groups_[task.group].count == 0) keys.push_back(key);
  }
  return keys;
}

std::optional<SnapshotRow> ClusterState::SnapshotTask(const TaskKey& key) const {
  auto it = tasks_.find(key);
  if (it == tasks_.end()) return std::nullopt;
  const ConstraintGroup& group = groups_[it->second.group];
  if (group.constraints.empty() || group.count == 0) return std::nullopt;
  return SnapshotRow{it->second.spec, group.constraints, group.count,
                     ClassifyGroup(static_cast<std::int64_t>(group.count))};
}

std::vector<SnapshotRow> ClusterState::SnapshotDatasetRows() const {
  std::vector<SnapshotRow> rows;
  for (const auto& [key, task] : tasks_) {
    if (auto row = SnapshotTask(key)) rows.push_back(std::move(*row));
  }
  return rows;
}

IntervalStats ClusterState::ComputeIntervalStats(std::uint64_t interval_start) const {
  IntervalStats stats;
  stats.interval_start = interval_start;
  stats.live_tasks = tasks_.size();
  for (const auto& [key, task] : tasks_) {
    const ConstraintGroup& group = groups_[task.group];
    if (group.constraints.empty() || group.count == 0) continue;
    ++stats.constrained_tasks;
    ++stats.histogram[ClassifyGroup(static_cast<std::int64_t>(group.count)).index()];
  }
  return stats;
}

TraceAnalyzer::TraceAnalyzer(MatcherOptions options, std::uint64_t interval_us)
    : state_(options), interval_(interval_us) {
  if (interval_us == 0) Fail(ErrorCode::kInvalidArgument, "interval must be positive");
}

void TraceAnalyzer::SampleUpTo(std::uint64_t timestamp) {
  if (!next_boundary_) {
    next_boundary_ = (timestamp / interval_) * interval_ + interval_;
    return;
  }
  while (timestamp >= *next_boundary_) {
    stats_.push_back(state_.ComputeIntervalStats(*next_boundary_ - interval_));
    *next_boundary_ += interval_;
    dirty_ = false;
  }
}

void TraceAnalyzer::Apply(const TraceEvent& event) {
  if (finished_) Fail(ErrorCode::kInvalidArgument, "analyzer already finished");
  if (event.timestamp >= state_.clock()) SampleUpTo(event.timestamp);
  if (const auto* finish = std::get_if<TaskFinish>(&event.payload)) {
    if (auto row = state_.SnapshotTask(finish->key)) {
      recorded_[finish->key] = std::move(*row);
    }
  }
  state_.Apply(event);
  dirty_ = true;
  ++events_applied_;
}

void TraceAnalyzer::Finish() {
  if (finished_) return;
  finished_ = true;
  if (next_boundary_ && dirty_) {
    stats_.push_back(state_.ComputeIntervalStats(*next_boundary_ - interval_));
  }
  for (SnapshotRow& row : state_.SnapshotDatasetRows()) {
    recorded_[row.task.key()] = std::move(row);
  }
}

std::vector<SnapshotRow> TraceAnalyzer::rows() const {
  std::vector<SnapshotRow> out;
  out.reserve(recorded_.size());
  for (const auto& [key, row] : recorded_) out.push_back(row);
  return out;
}

std::string FormatIntervalStatsCsv(std::span<const IntervalStats> stats) {
  std::ostringstream out;
  out << "interval_start,live_tasks,constrained_tasks";
  for (char c = 'A'; c <= 'Z'; ++c) out << ',' << c;
  out << '\n';
  for (const IntervalStats& s : stats) {
    out << s.interval_start << ',' << s.live_tasks << ',' << s.constrained_tasks;
    for (std::uint64_t h : s.histogram) out << ',' << h;
    out << '\n';
  }
  return out.str();
}

}  // namespace affinity
