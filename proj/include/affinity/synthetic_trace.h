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

// Seeded synthetic cluster traces with exact suitable-node ground truth.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "affinity/trace_model.h"

namespace affinity {

struct SyntheticTraceConfig {
  std::uint32_t n_nodes = 200;
  std::uint32_t n_attributes = 24;
  /// Fraction of attributes holding integers; the rest hold text.
  double integer_attribute_ratio = 0.5;
  std::uint32_t categories_per_text_attribute = 8;
  std::uint32_t n_jobs = 100;
  std::uint32_t min_tasks_per_job = 1;
  std::uint32_t max_tasks_per_job = 10;
  /// Distinct (cpu, mem) configurations per job, drawn in [1, max].
  std::uint32_t max_configs_per_job = 3;
  std::uint32_t min_constraints_per_task = 1;
  std::uint32_t max_constraints_per_task = 4;

  /// Target fractions of jobs whose tasks fit exactly one node (group A),
  /// 501..1000 nodes (group C), or carry no constraints at all. The
  /// remainder draw from the shared pool of constraint templates, which never
  /// produces counts in group A or C. Group B is left empty by default.
  double group_a_fraction = 0.02;
  double group_c_fraction = 0.0;
  double unconstrained_fraction = 0.5;

  /// Distinct constraint sets shared by the "remainder" jobs.
  std::uint32_t constraint_templates = 64;
  /// Nodes targeted by group-A jobs. Several jobs may target one node.
  std::uint32_t group_a_targets = 8;
  std::uint32_t group_c_templates = 8;

  /// Node update/remove/add events per interval.
  std::uint32_t churn_per_interval = 1;
  std::uint64_t interval_us = 300'000'000;
  std::uint64_t job_spacing_us = 1'000'000;
  /// Fractions of jobs whose tasks are later updated to a different
  /// constraint set of the same class, or finished before the trace ends.
  double task_update_fraction = 0.05;
  double task_finish_fraction = 0.1;

  std::uint64_t seed = 1;

  /// Throws Error(kInvalidArgument) for out-of-range fields.
  void Validate() const;
};

struct SyntheticTrace {
  std::vector<TraceEvent> node_events;
  std::vector<TraceEvent> task_events;
  /// Suitable-node count of every task at the moment its last state is
  /// recorded: just before its FINISH event, otherwise at the end of the
  /// trace. Counts come from exhaustive matching of the raw constraints.
  std::map<TaskKey, std::uint64_t> oracle;
};

/// Deterministic for a given config (including seed). Throws
/// Error(kInfeasibleConfig) when the requested mix cannot be realized.
SyntheticTrace GenerateSyntheticTrace(const SyntheticTraceConfig& config);

/// Named configurations: "small" (the defaults, 200 nodes) and "desk"
/// (12,500 nodes, 3,600 jobs; several thousand distinct dataset rows across
/// more than eight groups). Throws Error(kInvalidArgument) for other names.
SyntheticTraceConfig SyntheticPreset(std::string_view name, std::uint64_t seed = 1);

/// Attribute name for index i: A..Z, AA..AZ, BA..
std::string AttributeName(std::uint32_t index);

}  // namespace affinity
