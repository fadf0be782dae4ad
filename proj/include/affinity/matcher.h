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

// Cluster state replay with incremental suitable-node counting.
//
// Every live task references a constraint group: tasks whose compacted
// constraint sets are identical share one group, and each group keeps a
// bitmap over dense node slots plus the cached number of set bits. A node
// event re-evaluates each group against that one node only; a task event
// evaluates a group against all nodes only when the group is new.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "affinity/constraint_algebra.h"
#include "affinity/status.h"
#include "affinity/trace_model.h"

namespace affinity {

/// Allocation-difficulty class 'A'..'Z'.
class GroupLabel {
 public:
  GroupLabel() = default;
  /// Throws Error(kInvalidArgument) outside 'A'..'Z'.
  static GroupLabel FromLetter(char letter);

  char letter() const { return letter_; }
  std::size_t index() const { return static_cast<std::size_t>(letter_ - 'A'); }
  std::string str() const { return std::string(1, letter_); }

  auto operator<=>(const GroupLabel&) const = default;
  bool operator==(const GroupLabel&) const = default;

 private:
  explicit GroupLabel(char letter) : letter_(letter) {}
  char letter_ = 'A';
};

inline constexpr std::size_t kGroupCount = 26;

/// 1 -> 'A'; above 12000 -> 'Z'; otherwise the letter with code
/// 66 + (count - 1) / 500. Throws Error(kInvalidCount) for count <= 0.
GroupLabel ClassifyGroup(std::int64_t count);

/// Nodes satisfying every entry of `constraints`.
std::uint64_t BruteForceCount(std::span<const Node> nodes, const CompactedConstraintSet& constraints);

struct MatcherOptions {
  /// Strict mode throws on stale, unknown-node and unknown-task events;
  /// lenient mode counts and skips them.
  bool strict = false;
};

struct MatcherDiagnostics {
  std::uint64_t stale_events = 0;
  std::uint64_t unknown_node = 0;
  std::uint64_t unknown_task = 0;
  std::uint64_t duplicate_node = 0;
  std::uint64_t duplicate_task = 0;
  std::uint64_t unsatisfiable_tasks = 0;
  /// Tasks whose range operators carry Text or Empty operands.
  std::uint64_t type_mismatch_tasks = 0;
  /// Tasks whose count dropped to zero (on submit or after a node event).
  std::uint64_t orphaned_transitions = 0;

  bool operator==(const MatcherDiagnostics&) const = default;
};

/// One dataset row taken from live state.
struct SnapshotRow {
  TaskSpec task;
  CompactedConstraintSet constraints;
  std::uint64_t count = 0;
  GroupLabel group;
};

struct IntervalStats {
  std::uint64_t interval_start = 0;
  std::uint64_t live_tasks = 0;
  /// Live tasks with a non-empty constraint set and at least one suitable
  /// node. Orphaned tasks (zero suitable nodes) are live but not counted here.
  std::uint64_t constrained_tasks = 0;
  std::array<std::uint64_t, kGroupCount> histogram{};

  bool operator==(const IntervalStats&) const = default;
};

class ClusterState {
 public:
  explicit ClusterState(MatcherOptions options = {});

  /// Applies one event. Throws in strict mode (StaleEvent, UnknownNode,
  /// UnknownTask, InvalidArgument for duplicate adds/submits); the state is
  /// unchanged when it throws.
  void Apply(const TraceEvent& event);

  std::uint64_t clock() const { return clock_; }
  const MatcherDiagnostics& diagnostics() const { return diagnostics_; }

  std::size_t node_count() const { return node_slots_.size(); }
  const Node* FindNode(std::string_view id) const;
  /// Current nodes in id order.
  std::vector<Node> Nodes() const;

  std::size_t live_task_count() const { return tasks_.size(); }
  bool IsLive(const TaskKey& key) const { return tasks_.count(key) > 0; }
  std::vector<TaskKey> LiveTasks() const;
  const TaskSpec* FindTask(const TaskKey& key) const;
  const CompactedConstraintSet* Constraints(const TaskKey& key) const;
  /// Cached suitable-node count; nullopt when the task is not live.
  std::optional<std::uint64_t> SuitableCount(const TaskKey& key) const;
  /// Suitable node ids, sorted.
  std::vector<std::string> SuitableNodes(const TaskKey& key) const;
  std::vector<TaskKey> OrphanedTasks() const;

  /// Number of node-versus-constraint-set evaluations performed so far.
  std::uint64_t match_evaluations() const { return match_evaluations_; }
  std::size_t constraint_group_count() const { return group_index_.size(); }

  /// One row per live constrained task with a non-zero count, in key order.
  std::vector<SnapshotRow> SnapshotDatasetRows() const;
  std::optional<SnapshotRow> SnapshotTask(const TaskKey& key) const;
  IntervalStats ComputeIntervalStats(std::uint64_t interval_start) const;

 private:
  struct Slot {
    bool used = false;
    Node node;
    // Node value by interned attribute id, nullptr when absent.
    std::vector<const AttributeValue*> values;
  };
  struct CompiledEntry {
    std::uint32_t attribute_id;
    const CompactedConstraint* constraint;
  };
  struct ConstraintGroup {
    CompactedConstraintSet constraints;
    std::vector<CompiledEntry> compiled;
    boost::dynamic_bitset<std::uint64_t> members;
    std::uint64_t count = 0;
    std::uint32_t refs = 0;
    std::string key;
  };
  struct LiveTask {
    TaskSpec spec;
    std::uint32_t group = 0;
  };

  void ApplyNodeAdd(const Node& node);
  void ApplyNodeUpdate(const Node& node);
  void ApplyNodeRemove(const std::string& id);
  void ApplyTaskSubmit(const TaskSpec& spec, bool is_update);
  void ApplyTaskFinish(const TaskKey& key);
  void Reject(ErrorCode code, std::uint64_t& counter, const std::string& message);

  std::uint32_t InternAttribute(const std::string& name);
  void FillSlot(std::uint32_t slot, const Node& node);
  bool Evaluate(const ConstraintGroup& group, const Slot& slot);
  void ReevaluateSlot(std::uint32_t slot);
  std::uint32_t AcquireGroup(CompactedConstraintSet constraints);
  void ReleaseGroup(std::uint32_t group);

  MatcherOptions options_;
  MatcherDiagnostics diagnostics_;
  std::uint64_t clock_ = 0;
  std::uint64_t match_evaluations_ = 0;

  std::unordered_map<std::string, std::uint32_t> attribute_ids_;
  std::deque<Slot> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::map<std::string, std::uint32_t, std::less<>> node_slots_;

  std::deque<ConstraintGroup> groups_;
  std::vector<std::uint32_t> free_groups_;
  std::unordered_map<std::string, std::uint32_t> group_index_;

  std::map<TaskKey, LiveTask> tasks_;
  // Tasks dropped as unsatisfiable; their later UPDATE/FINISH are not unknown.
  std::map<TaskKey, TaskSpec> dropped_;
};

/// Drives a ClusterState over an event stream: samples interval statistics
/// at every elapsed boundary and records each task's last dataset row, taken
/// just before it finishes or at the end of the stream.
class TraceAnalyzer {
 public:
  TraceAnalyzer(MatcherOptions options, std::uint64_t interval_us);

  void Apply(const TraceEvent& event);
  /// Emits the trailing partial interval and records rows of live tasks.
  void Finish();

  const ClusterState& state() const { return state_; }
  const std::vector<IntervalStats>& stats() const { return stats_; }
  /// Recorded rows in task-key order.
  std::vector<SnapshotRow> rows() const;
  std::uint64_t events_applied() const { return events_applied_; }

 private:
  void SampleUpTo(std::uint64_t timestamp);

  ClusterState state_;
  std::uint64_t interval_;
  std::optional<std::uint64_t> next_boundary_;
  bool dirty_ = false;
  bool finished_ = false;
  std::uint64_t events_applied_ = 0;
  std::vector<IntervalStats> stats_;
  std::map<TaskKey, SnapshotRow> recorded_;
};

/// `interval_start,live_tasks,constrained_tasks,A,...,Z` plus one line per
/// sample.
std::string FormatIntervalStatsCsv(std::span<const IntervalStats> stats);

}  // namespace affinity
