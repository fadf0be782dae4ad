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


// Hard-voting ensemble of MLP, RIDGE and SGD_HINGE, the repeated
// train/test protocol, and evaluation reports.

#pragma once

#include <cstdint>
#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affinity/classifiers.h"
#include "affinity/feature_pipeline.h"
#include "affinity/matcher.h"

namespace affinity {

struct SplitSpec {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded Fisher-Yates shuffle of [0, n); the first floor(n * fraction)
/// indices (clamped to [1, n - 1]) train. Throws kTooFewRows for n < 2 and
/// kInvalidArgument for a fraction outside (0, 1).
SplitIndices TrainTestSplitIndices(std::size_t n, const SplitSpec& spec);
std::pair<Dataset, Dataset> TrainTestSplit(const Dataset& dataset, const SplitSpec& spec);

/// Member order of the ensemble.
inline constexpr ClassifierKind kEnsembleKinds[] = {ClassifierKind::kMlp, ClassifierKind::kRidge,
                                                    ClassifierKind::kSgdHinge};

struct VotingEnsemble {
  std::vector<TrainedModel> members;
  Metadata metadata;

  std::size_t width() const { return members.empty() ? 0 : members.front().width; }
  bool operator==(const VotingEnsemble&) const = default;
};

/// Member i is trained with seed DeriveSeed(seed, i) and default
/// hyperparameters.
VotingEnsemble TrainEnsemble(const SparseMatrix& features, std::span<const GroupLabel> labels,
                             std::uint64_t seed, std::size_t threads = 1);
VotingEnsemble TrainEnsemble(const Dataset& dataset, std::uint64_t seed, std::size_t threads = 1);

/// Most frequent label; ties go to the smallest label.
GroupLabel MajorityVote(std::span<const GroupLabel> votes);

/// Throws Error(kWidthMismatch).
std::vector<GroupLabel> PredictEnsemble(const VotingEnsemble& ensemble,
                                        const SparseMatrix& features, std::size_t threads = 1);

inline constexpr std::string_view kEnsembleMagic = "affinity-ensemble";
std::string SerializeEnsemble(const VotingEnsemble& ensemble);
VotingEnsemble ParseEnsemble(std::string_view file);

struct ClassMetrics {
  GroupLabel label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;

  bool operator==(const ClassMetrics&) const = default;
};

struct EvaluationReport {
  std::uint64_t samples = 0;
  double accuracy = 0.0;
  /// Sorted union of true and predicted labels; indexes the matrix rows
  /// (true) and columns (predicted).
  std::vector<GroupLabel> labels;
  std::vector<std::vector<std::uint64_t>> confusion;
  std::vector<ClassMetrics> per_class;
  std::uint64_t true_a = 0;
  /// Fraction of true-A rows predicted 'Z'; 0 when there are none.
  double a_to_z_rate = 0.0;
  /// Fraction of true-A rows predicted anything but 'A'; 0 when there are none.
  double a_misrouted_rate = 0.0;

  const ClassMetrics* Find(GroupLabel label) const;
  bool operator==(const EvaluationReport&) const = default;
};

/// Throws kLengthMismatch for different or zero lengths.
EvaluationReport Evaluate(std::span<const GroupLabel> truth, std::span<const GroupLabel> predicted);

struct RunTiming {
  double train_wall_seconds = 0.0;
  double train_cpu_seconds = 0.0;
  double predict_wall_seconds = 0.0;
  double predict_cpu_seconds = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  EvaluationReport report;
  RunTiming timing;
};

struct F1Range {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  std::size_t runs = 0;
};

struct ProtocolReport {
  std::uint64_t base_seed = 0;
  double train_fraction = 0.75;
  std::size_t rows = 0;
  std::vector<RunResult> runs;
  double mean_accuracy = 0.0;
  /// Over the runs in which the label occurs.
  std::map<GroupLabel, F1Range> f1;
  double max_a_misrouted_rate = 0.0;
  double mean_a_to_z_rate = 0.0;
};

/// Runs split/train/evaluate with split seeds base_seed .. base_seed + runs - 1.
ProtocolReport RunProtocol(const Dataset& dataset, std::size_t runs, std::uint64_t base_seed,
                           double train_fraction = 0.75, std::size_t threads = 1);

/// `true:<G>` rows by `pred:<G>` columns with right-aligned counts.
std::string RenderConfusionMatrix(const EvaluationReport& report);
/// Per-class precision, recall, F1 and support with 4 decimals.
std::string RenderClassificationReport(const EvaluationReport& report);
/// Text report without timings, so equal inputs give equal bytes.
std::string RenderProtocolReport(const ProtocolReport& report, const Metadata& metadata = {});
/// `metric,class,value` lines.
std::string RenderMetricsCsv(const ProtocolReport& report);
/// Per-run wall and CPU times.
std::string RenderTimingsCsv(const ProtocolReport& report);

}  // namespace affinity
