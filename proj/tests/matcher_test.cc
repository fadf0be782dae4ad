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


#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "affinity/matcher.h"
#include "affinity/random.h"
#include "affinity/status.h"
#include "test_support.h"

namespace affinity {
namespace {

using V = AttributeValue;
using testing::MakeEvent;

Node MakeNode(std::string id, std::map<std::string, V> attrs = {}) {
  Node node;
  node.id = std::move(id);
  for (auto& [k, v] : attrs) node.attributes.emplace(k, v);
  return node;
}

TaskSpec MakeTask(std::uint64_t job, std::uint32_t index, std::vector<RawConstraint> cs = {}) {
  TaskSpec spec;
  spec.job_id = job;
  spec.task_index = index;
  spec.constraints = std::move(cs);
  return spec;
}

// Listing-style arithmetic, written independently of the library.
char ReferenceGroup(std::int64_t count) {
  if (count == 1) return 'A';
  if (count > 12000) return 'Z';
  return static_cast<char>((count - 1) / 500 + 66);
}

TEST(ClassifyGroupTest, Boundaries) {
  const std::pair<std::int64_t, char> cases[] = {{1, 'A'},    {2, 'B'},     {500, 'B'},
                                                 {501, 'C'},  {1000, 'C'},  {1001, 'D'},
                                                 {12000, 'Y'}, {12001, 'Z'}};
  for (auto [count, letter] : cases) EXPECT_EQ(ClassifyGroup(count).letter(), letter) << count;
}

TEST(ClassifyGroupTest, MatchesReferenceArithmetic) {
  for (std::int64_t c = 1; c <= 13000; ++c) {
    ASSERT_EQ(ClassifyGroup(c).letter(), ReferenceGroup(c)) << c;
  }
}

TEST(ClassifyGroupTest, RejectsNonPositive) {
  for (std::int64_t c : {0, -1}) {
    try {
      ClassifyGroup(c);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidCount);
    }
  }
}

TEST(BruteForceCountTest, Examples) {
  std::vector<Node> nodes;
  for (int i = 0; i < 12500; ++i) nodes.push_back(MakeNode("n" + std::to_string(i)));
  EXPECT_EQ(BruteForceCount(nodes, CompactedConstraintSet{}), 12500u);
  CompactedConstraintSet eq;
  eq.entries.emplace("Q", CompactedConstraint::Equal("Q", V::Integer(1)));
  EXPECT_EQ(BruteForceCount(nodes, eq), 0u);
  nodes[17].attributes.emplace("Q", V::Integer(1));
  EXPECT_EQ(BruteForceCount(nodes, eq), 1u);
}

TEST(ClusterStateTest, SubmitThenRemove) {
  ClusterState state;
  for (int i = 0; i < 3; ++i) state.Apply(MakeEvent(1, NodeAdd{MakeNode("n" + std::to_string(i))}));
  state.Apply(MakeEvent(2, TaskSubmit{MakeTask(1, 0)}));
  EXPECT_EQ(state.SuitableCount({1, 0}), 3u);
  state.Apply(MakeEvent(3, NodeRemove{"n1"}));
  EXPECT_EQ(state.SuitableCount({1, 0}), 2u);
  EXPECT_EQ(state.SuitableNodes({1, 0}), (std::vector<std::string>{"n0", "n2"}));
}

TEST(ClusterStateTest, NodeUpdateReplacesAttributes) {
  ClusterState state;
  state.Apply(MakeEvent(1, NodeAdd{MakeNode("n0", {{"A", V::Integer(1)}, {"B", V::Integer(2)}})}));
  state.Apply(MakeEvent(2, TaskSubmit{MakeTask(1, 0, {{"B", ConstraintOp::kEqual, V::Integer(2)}})}));
  EXPECT_EQ(state.SuitableCount({1, 0}), 1u);
  state.Apply(MakeEvent(3, NodeUpdate{MakeNode("n0", {{"A", V::Integer(1)}})}));
  EXPECT_EQ(state.SuitableCount({1, 0}), 0u);
  EXPECT_EQ(state.OrphanedTasks(), (std::vector<TaskKey>{{1, 0}}));
  EXPECT_EQ(state.diagnostics().orphaned_transitions, 1u);
}

TEST(ClusterStateTest, LenientModeCountsAnomalies) {
  ClusterState state;
  state.Apply(MakeEvent(5, NodeAdd{MakeNode("n0")}));
  state.Apply(MakeEvent(4, NodeAdd{MakeNode("n1")}));
  state.Apply(MakeEvent(6, NodeRemove{"zz"}));
  state.Apply(MakeEvent(6, NodeUpdate{MakeNode("zz")}));
  state.Apply(MakeEvent(7, TaskFinish{{9, 9}}));
  state.Apply(MakeEvent(7, TaskUpdate{MakeTask(9, 9)}));
  state.Apply(MakeEvent(8, TaskSubmit{MakeTask(1, 0, {{"A", ConstraintOp::kEqual, V::Integer(1)},
                                                      {"A", ConstraintOp::kEqual, V::Integer(2)}})}));
  EXPECT_EQ(state.diagnostics().stale_events, 1u);
  EXPECT_EQ(state.diagnostics().unknown_node, 2u);
  EXPECT_EQ(state.diagnostics().unknown_task, 2u);
  EXPECT_EQ(state.diagnostics().unsatisfiable_tasks, 1u);
  EXPECT_EQ(state.node_count(), 1u);
  EXPECT_EQ(state.live_task_count(), 0u);
  // Finishing a dropped task is not an anomaly.
  state.Apply(MakeEvent(9, TaskFinish{{1, 0}}));
  EXPECT_EQ(state.diagnostics().unknown_task, 2u);
}

TEST(ClusterStateTest, StrictModeThrowsWithoutMutation) {
  ClusterState state(MatcherOptions{.strict = true});
  state.Apply(MakeEvent(5, NodeAdd{MakeNode("n0")}));
  auto expect_code = [&](const TraceEvent& e, ErrorCode code) {
    try {
      state.Apply(e);
      ADD_FAILURE() << "no error";
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), code);
    }
  };
  expect_code(MakeEvent(4, NodeAdd{MakeNode("n1")}), ErrorCode::kStaleEvent);
  expect_code(MakeEvent(6, NodeRemove{"zz"}), ErrorCode::kUnknownNode);
  expect_code(MakeEvent(6, TaskFinish{{1, 1}}), ErrorCode::kUnknownTask);
  EXPECT_EQ(state.clock(), 5u);
  EXPECT_EQ(state.node_count(), 1u);
  EXPECT_EQ(state.diagnostics(), MatcherDiagnostics{});
}

TEST(ClusterStateTest, SnapshotUsesLatestConstraints) {
  ClusterState state;
  state.Apply(MakeEvent(1, NodeAdd{MakeNode("n0", {{"A", V::Integer(1)}})}));
  state.Apply(MakeEvent(1, NodeAdd{MakeNode("n1", {{"A", V::Integer(2)}})}));
  EXPECT_TRUE(state.SnapshotDatasetRows().empty());
  state.Apply(MakeEvent(2, TaskSubmit{MakeTask(1, 0, {{"A", ConstraintOp::kGreaterEqual, V::Integer(0)}})}));
  state.Apply(MakeEvent(3, TaskUpdate{MakeTask(1, 0, {{"A", ConstraintOp::kLessThan, V::Integer(5)}})}));
  state.Apply(MakeEvent(4, TaskUpdate{MakeTask(1, 0, {{"A", ConstraintOp::kEqual, V::Integer(2)}})}));
  state.Apply(MakeEvent(4, TaskSubmit{MakeTask(2, 0)}));
  std::vector<SnapshotRow> rows = state.SnapshotDatasetRows();
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].count, 1u);
  EXPECT_EQ(rows[0].group.letter(), 'A');
  EXPECT_EQ(CanonicalLabels(rows[0].constraints), (std::vector<std::string>{"A|EQ|i:2"}));
}

TEST(ClusterStateTest, IntervalStats) {
  ClusterState state;
  EXPECT_EQ(state.ComputeIntervalStats(0), IntervalStats{});
  for (int i = 0; i < 3; ++i) {
    state.Apply(MakeEvent(1, NodeAdd{MakeNode("n" + std::to_string(i), {{"A", V::Integer(i)}})}));
  }
  for (std::uint64_t j = 0; j < 10; ++j) {
    std::vector<RawConstraint> cs;
    if (j < 3) cs.push_back({"A", ConstraintOp::kGreaterEqual, V::Integer(static_cast<std::int64_t>(j))});
    state.Apply(MakeEvent(2, TaskSubmit{MakeTask(j, 0, cs)}));
  }
  IntervalStats stats = state.ComputeIntervalStats(300);
  EXPECT_EQ(stats.live_tasks, 10u);
  EXPECT_EQ(stats.constrained_tasks, 3u);
  EXPECT_EQ(stats.histogram[0], 1u);  // A >= 2 leaves one node
  EXPECT_EQ(stats.histogram[1], 2u);
}

TEST(ClusterStateTest, OracleEquivalenceOnRandomStreams) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    ClusterState state;
    for (const TraceEvent& e : testing::RandomEventStream(rng, 1000, 60, 40)) {
      state.Apply(e);
      ASSERT_EQ(testing::CountOracleViolations(state), 0u) << seed;
    }
    EXPECT_EQ(state.diagnostics().stale_events + state.diagnostics().unknown_node +
                  state.diagnostics().unknown_task,
              0u);
  }
}

TEST(ClusterStateTest, IncrementalCostBounds) {
  Rng rng(77);
  ClusterState state;
  for (const TraceEvent& e : testing::RandomEventStream(rng, 2000, 80, 60)) {
    const std::uint64_t before = state.match_evaluations();
    const std::size_t live = state.live_task_count();
    state.Apply(e);
    const std::uint64_t used = state.match_evaluations() - before;
    if (e.is_node_event()) {
      ASSERT_LE(used, live);
    } else {
      ASSERT_LE(used, state.node_count());
    }
  }
}

TEST(ClusterStateTest, MonotoneUnderAddAndRemove) {
  Rng rng(88);
  ClusterState state;
  std::uint64_t next = 0;
  for (const TraceEvent& e : testing::RandomEventStream(rng, 1500, 50, 50)) {
    state.Apply(e);
    if (next++ % 7 != 0 || state.node_count() == 0) continue;
    std::map<TaskKey, std::uint64_t> before;
    for (const TaskKey& k : state.LiveTasks()) before[k] = *state.SuitableCount(k);
    ClusterState added = state;
    added.Apply(MakeEvent(e.timestamp, NodeAdd{testing::RandomNode(rng, "extra")}));
    for (const auto& [k, c] : before) ASSERT_GE(*added.SuitableCount(k), c);
    ClusterState removed = state;
    removed.Apply(MakeEvent(e.timestamp, NodeRemove{state.Nodes().front().id}));
    for (const auto& [k, c] : before) ASSERT_LE(*removed.SuitableCount(k), c);
  }
}

TEST(TraceAnalyzerTest, SamplesEveryElapsedBoundary) {
  TraceAnalyzer analyzer(MatcherOptions{}, 100);
  analyzer.Apply(MakeEvent(10, NodeAdd{MakeNode("n0", {{"A", V::Integer(1)}})}));
  analyzer.Apply(MakeEvent(20, TaskSubmit{MakeTask(1, 0, {{"A", ConstraintOp::kEqual, V::Integer(1)}})}));
  analyzer.Apply(MakeEvent(350, TaskFinish{{1, 0}}));
  analyzer.Apply(MakeEvent(360, TaskSubmit{MakeTask(2, 0)}));
  analyzer.Finish();
  const auto& stats = analyzer.stats();
  ASSERT_EQ(stats.size(), 4u);
  EXPECT_EQ(stats[0].interval_start, 0u);
  EXPECT_EQ(stats[0].constrained_tasks, 1u);
  EXPECT_EQ(stats[2].interval_start, 200u);
  EXPECT_EQ(stats[2].live_tasks, 1u);
  EXPECT_EQ(stats[3].interval_start, 300u);
  EXPECT_EQ(stats[3].constrained_tasks, 0u);
  std::vector<SnapshotRow> rows = analyzer.rows();
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].task.job_id, 1u);
  EXPECT_EQ(rows[0].group.letter(), 'A');
  EXPECT_NE(FormatIntervalStatsCsv(stats).find("interval_start,live_tasks,constrained_tasks,A,B"),
            std::string::npos);
}

}  // namespace
}  // namespace affinity
