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


#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "affinity/random.h"
#include "affinity/status.h"
#include "affinity/synthetic_trace.h"
#include "affinity/trace_io.h"
#include "affinity/trace_model.h"
#include "test_support.h"

namespace affinity {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

TEST(AttributeValueTest, IntegerAndTextAreDistinct) {
  EXPECT_NE(AttributeValue::Integer(4), AttributeValue::Text("4"));
  EXPECT_EQ(AttributeValue::Text("x"), AttributeValue::Text("x"));
  EXPECT_TRUE(AttributeValue::Empty().is_empty());
}

TEST(AttributeValueTest, TextRejectsReservedCharacters) {
  EXPECT_EQ(CodeOf([] { AttributeValue::Text(""); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { AttributeValue::Text("a;b"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { AttributeValue::Text("a,b"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { AttributeValue::Text("a\nb"); }), ErrorCode::kInvalidArgument);
}

TEST(TaggedValueTest, RoundTrips) {
  for (const char* text : {"i:4", "i:-17", "s:qe", "e:"}) {
    EXPECT_EQ(FormatTaggedValue(ParseTaggedValue(text)), text);
  }
}

TEST(ParseNodeEventTest, AddWithAttributes) {
  TraceEvent e = ParseNodeEvent("10,ADD,n1,A=i:4;B=s:x");
  EXPECT_EQ(e.timestamp, 10u);
  const auto& add = std::get<NodeAdd>(e.payload);
  EXPECT_EQ(add.node.id, "n1");
  ASSERT_EQ(add.node.attributes.size(), 2u);
  EXPECT_EQ(add.node.attributes.at("A"), AttributeValue::Integer(4));
  EXPECT_EQ(add.node.attributes.at("B"), AttributeValue::Text("x"));
}

TEST(ParseNodeEventTest, AttributeOrderDoesNotMatter) {
  EXPECT_EQ(ParseNodeEvent("10,ADD,n1,B=s:x;A=i:4"), ParseNodeEvent("10,ADD,n1,A=i:4;B=s:x"));
}

TEST(ParseNodeEventTest, Remove) {
  TraceEvent e = ParseNodeEvent("20,REMOVE,n1,");
  EXPECT_EQ(e.timestamp, 20u);
  EXPECT_EQ(std::get<NodeRemove>(e.payload).node_id, "n1");
}

TEST(ParseNodeEventTest, Errors) {
  EXPECT_EQ(CodeOf([] { ParseNodeEvent("10,ADD,n1,A=i:4;A=i:5"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf([] { ParseNodeEvent("10,ADD,n1"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf([] { ParseNodeEvent("10,MOVE,n1,"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf([] { ParseNodeEvent("10,ADD,n1,A=q:4"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf([] { ParseNodeEvent("x,ADD,n1,"); }), ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf([] { ParseNodeEvent("10,REMOVE,n1,A=i:1"); }), ErrorCode::kMalformedLine);
}

TEST(ParseTaskEventTest, SubmitWithConstraints) {
  TraceEvent e = ParseTaskEvent("10,SUBMIT,42,0,0.25,0.50,E,GE,i:0;D,EQ,e:");
  const TaskSpec& spec = std::get<TaskSubmit>(e.payload).task;
  EXPECT_EQ(spec.job_id, 42u);
  EXPECT_EQ(spec.task_index, 0u);
  EXPECT_DOUBLE_EQ(spec.cpu, 0.25);
  EXPECT_DOUBLE_EQ(spec.mem, 0.5);
  ASSERT_EQ(spec.constraints.size(), 2u);
  EXPECT_EQ(spec.constraints[0],
            (RawConstraint{"E", ConstraintOp::kGreaterEqual, AttributeValue::Integer(0)}));
  EXPECT_EQ(spec.constraints[1],
            (RawConstraint{"D", ConstraintOp::kEqual, AttributeValue::Empty()}));
}

TEST(ParseTaskEventTest, Finish) {
  TraceEvent e = ParseTaskEvent("11,FINISH,42,0,,,");
  EXPECT_EQ(std::get<TaskFinish>(e.payload).key, (TaskKey{42, 0}));
}

TEST(ParseTaskEventTest, Errors) {
  EXPECT_EQ(CodeOf([] { ParseTaskEvent("10,SUBMIT,1,0,1.5,0.1,"); }),
            ErrorCode::kValueOutOfRange);
  EXPECT_EQ(CodeOf([] { ParseTaskEvent("10,SUBMIT,1,0,0.5,nan,"); }),
            ErrorCode::kValueOutOfRange);
  EXPECT_EQ(CodeOf([] { ParseTaskEvent("10,SUBMIT,1,0,0.5,0.1,A,XX,i:1"); }),
            ErrorCode::kUnknownOperator);
  EXPECT_EQ(CodeOf([] { ParseTaskEvent("10,SUBMIT,1,0,0.5,0.1,A,EQ"); }),
            ErrorCode::kMalformedLine);
  EXPECT_EQ(CodeOf([] { ParseTaskEvent("10,FINISH,1,0,0.5,,"); }), ErrorCode::kMalformedLine);
}

TEST(RoundTripTest, CanonicalForms) {
  EXPECT_EQ(FormatNodeEvent(ParseNodeEvent("10,ADD,n1,B=s:x;A=i:4")), "10,ADD,n1,A=i:4;B=s:x");
  EXPECT_EQ(FormatNodeEvent(ParseNodeEvent("20,REMOVE,n1,")), "20,REMOVE,n1,");
  for (const char* line : {"10,SUBMIT,42,0,0.25,0.5,E,GE,i:0;D,EQ,e:", "11,FINISH,42,0,,,",
                           "12,UPDATE,7,3,0,1,A,NE,s:x;A,GT,i:-3", "13,SUBMIT,7,4,0.125,0.5,"}) {
    EXPECT_EQ(FormatTaskEvent(ParseTaskEvent(line)), line);
  }
}

TEST(RoundTripTest, RandomEventsSurviveFormatAndParse) {
  Rng rng(3);
  for (const TraceEvent& e : testing::RandomEventStream(rng, 2000, 50, 50)) {
    if (e.is_node_event()) {
      EXPECT_EQ(ParseNodeEvent(FormatNodeEvent(e)), e);
    } else {
      EXPECT_EQ(ParseTaskEvent(FormatTaskEvent(e)), e);
    }
  }
}

TEST(ParserFuzzTest, EveryLineYieldsEventOrTypedError) {
  Rng rng(11);
  const std::string alphabet = "0123456789,;:=-.ADDUPTEREMOVSBIFNHGLQisen \t\xff";
  const std::string seeds[] = {"10,ADD,n1,A=i:4;B=s:x", "10,SUBMIT,42,0,0.25,0.50,E,GE,i:0"};
  for (int i = 0; i < 20000; ++i) {
    std::string line;
    if (i % 2 == 0) {
      line = seeds[rng.Below(2)];
      for (int m = 0; m < 3; ++m) {
        line[rng.Below(line.size())] = alphabet[rng.Below(alphabet.size())];
      }
    } else {
      const std::size_t len = i % 100 == 1 ? 65536 : rng.Below(80);
      for (std::size_t k = 0; k < len; ++k) line += alphabet[rng.Below(alphabet.size())];
    }
    for (int kind = 0; kind < 2; ++kind) {
      try {
        kind == 0 ? ParseNodeEvent(line) : ParseTaskEvent(line);
      } catch (const Error&) {
      }
    }
  }
}

TEST(TraceReaderTest, DetectsNonMonotonicTimestamps) {
  std::istringstream in("timestamp,event,node_id,attributes\n5,ADD,n1,\n4,ADD,n2,\n");
  TraceReader reader(in, TraceKind::kNodes);
  ASSERT_TRUE(reader.Next().has_value());
  EXPECT_EQ(CodeOf([&] { reader.Next(); }), ErrorCode::kNonMonotonicTimestamp);
}

TEST(TraceReaderTest, RejectsWrongHeader) {
  std::istringstream in("timestamp,event,job_id\n");
  TraceReader reader(in, TraceKind::kTasks);
  EXPECT_EQ(CodeOf([&] { reader.Next(); }), ErrorCode::kMalformedLine);
}

TEST(TraceReaderTest, MergeOrdersNodeEventsFirstAtTies) {
  std::istringstream nodes("timestamp,event,node_id,attributes\n5,ADD,n1,\n9,REMOVE,n1,\n");
  std::istringstream tasks(
      "timestamp,event,job_id,task_index,cpu,mem,constraints\n5,SUBMIT,1,0,0,0,\n7,FINISH,1,0,,,\n");
  MergedTraceReader reader(nodes, tasks);
  std::vector<std::size_t> kinds;
  while (auto e = reader.Next()) kinds.push_back(e->payload.index());
  EXPECT_EQ(kinds, (std::vector<std::size_t>{0, 3, 5, 2}));
}

TEST(SyntheticTraceTest, SameSeedSameTrace) {
  SyntheticTraceConfig config;
  config.seed = 7;
  SyntheticTrace a = GenerateSyntheticTrace(config);
  SyntheticTrace b = GenerateSyntheticTrace(config);
  EXPECT_EQ(WriteTrace(a.node_events, TraceKind::kNodes),
            WriteTrace(b.node_events, TraceKind::kNodes));
  EXPECT_EQ(WriteTrace(a.task_events, TraceKind::kTasks),
            WriteTrace(b.task_events, TraceKind::kTasks));
  config.seed = 8;
  SyntheticTrace c = GenerateSyntheticTrace(config);
  EXPECT_NE(WriteTrace(a.task_events, TraceKind::kTasks),
            WriteTrace(c.task_events, TraceKind::kTasks));
}

TEST(SyntheticTraceTest, GroupAFractionNearTarget) {
  SyntheticTraceConfig config;
  config.n_nodes = 200;
  config.group_a_fraction = 0.02;
  config.seed = 7;
  config.n_jobs = 500;
  SyntheticTrace trace = GenerateSyntheticTrace(config);
  std::size_t ones = 0;
  for (const auto& [key, count] : trace.oracle) ones += count == 1;
  const double fraction = static_cast<double>(ones) / static_cast<double>(trace.oracle.size());
  EXPECT_NEAR(fraction, 0.02, 0.015);
}

TEST(SyntheticTraceTest, NoConstraintsMeansEveryNode) {
  SyntheticTraceConfig config;
  config.min_constraints_per_task = 0;
  config.max_constraints_per_task = 0;
  config.group_a_fraction = 0.0;
  config.churn_per_interval = 0;
  config.seed = 5;
  SyntheticTrace trace = GenerateSyntheticTrace(config);
  ASSERT_FALSE(trace.oracle.empty());
  for (const auto& [key, count] : trace.oracle) EXPECT_EQ(count, config.n_nodes);
}

TEST(SyntheticTraceTest, OracleMatchesExhaustiveReplay) {
  SyntheticTraceConfig config;
  config.seed = 21;
  config.group_a_fraction = 0.05;
  config.group_c_fraction = 0.0;
  config.churn_per_interval = 3;
  SyntheticTrace trace = GenerateSyntheticTrace(config);
  std::map<std::string, Node> nodes;
  std::map<TaskKey, TaskSpec> tasks;
  std::map<TaskKey, std::uint64_t> observed;
  auto count = [&](const TaskSpec& spec) {
    std::uint64_t n = 0;
    for (const auto& [id, node] : nodes) n += testing::ReferenceMatchesRaw(node, spec.constraints);
    return n;
  };
  std::istringstream node_in(WriteTrace(trace.node_events, TraceKind::kNodes));
  std::istringstream task_in(WriteTrace(trace.task_events, TraceKind::kTasks));
  MergedTraceReader reader(node_in, task_in);
  while (auto e = reader.Next()) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NodeAdd> || std::is_same_v<T, NodeUpdate>) {
            nodes[p.node.id] = p.node;
          } else if constexpr (std::is_same_v<T, NodeRemove>) {
            nodes.erase(p.node_id);
          } else if constexpr (std::is_same_v<T, TaskSubmit> || std::is_same_v<T, TaskUpdate>) {
            tasks[p.task.key()] = p.task;
          } else {
            observed[p.key] = count(tasks.at(p.key));
            tasks.erase(p.key);
          }
        },
        e->payload);
  }
  for (const auto& [key, spec] : tasks) observed[key] = count(spec);
  EXPECT_EQ(observed, trace.oracle);
}

TEST(SyntheticTraceTest, InfeasibleConfigs) {
  SyntheticTraceConfig config;
  config.group_a_fraction = 0.1;
  config.max_constraints_per_task = 0;
  config.min_constraints_per_task = 0;
  EXPECT_EQ(CodeOf([&] { GenerateSyntheticTrace(config); }), ErrorCode::kInfeasibleConfig);
  SyntheticTraceConfig c_config;
  c_config.group_c_fraction = 0.1;
  c_config.n_nodes = 100;
  EXPECT_EQ(CodeOf([&] { GenerateSyntheticTrace(c_config); }), ErrorCode::kInfeasibleConfig);
}

}  // namespace
}  // namespace affinity
