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


#include "affinity/ensemble_eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "affinity/parallel.h"
#include "affinity/random.h"
#include "affinity/status.h"
#include "affinity/text.h"

namespace affinity {
namespace {

class Stopwatch {
 public:
  Stopwatch() : wall_(std::chrono::steady_clock::now()), cpu_(std::clock()) {}
  double WallSeconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_).count();
  }
  double CpuSeconds() const {
    return static_cast<double>(std::clock() - cpu_) / CLOCKS_PER_SEC;
  }

 private:
  std::chrono::steady_clock::time_point wall_;
  std::clock_t cpu_;
};

std::string Fixed4(double value) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << value;
  return out.str();
}

double SafeRatio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

SplitIndices TrainTestSplitIndices(std::size_t n, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "train fraction must be in (0, 1), got " +
                                          FormatDouble(spec.train_fraction));
  }
  if (n < 2) {
    Fail(ErrorCode::kTooFewRows,
         "a train/test split needs at least 2 rows, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.Below(i + 1));
    std::swap(order[i], order[j]);
  }
  auto train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_fraction));
  train = std::clamp<std::size_t>(train, 1, n - 1);
  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train), order.end());
  return split;
}

std::pair<Dataset, Dataset> TrainTestSplit(const Dataset& dataset, const SplitSpec& spec) {
  const SplitIndices split = TrainTestSplitIndices(dataset.rows.size(), spec);
  return {SelectRows(dataset, split.train), SelectRows(dataset, split.test)};
}

VotingEnsemble TrainEnsemble(const SparseMatrix& features, std::span<const GroupLabel> labels,
                             std::uint64_t seed, std::size_t threads) {
  constexpr std::size_t kMembers = std::size(kEnsembleKinds);
  VotingEnsemble ensemble;
  ensemble.members.resize(kMembers);
  const std::size_t workers = ResolveThreads(threads);
  // Members train concurrently; each one gets a share of the workers.
  const std::size_t inner = std::max<std::size_t>(1, workers / kMembers);
  ParallelFor(kMembers, workers, [&](std::size_t i) {
    ClassifierSpec spec;
    spec.kind = kEnsembleKinds[i];
    spec.seed = DeriveSeed(seed, i);
    spec.threads = inner;
    ensemble.members[i] = Train(spec, features, labels);
  });
  ensemble.metadata["seed"] = std::to_string(seed);
  return ensemble;
}

VotingEnsemble TrainEnsemble(const Dataset& dataset, std::uint64_t seed, std::size_t threads) {
  VotingEnsemble ensemble = TrainEnsemble(dataset.Features(), dataset.Labels(), seed, threads);
  for (const auto& [key, value] : dataset.metadata) {
    ensemble.metadata.emplace("dataset." + key, value);
  }
  return ensemble;
}

GroupLabel MajorityVote(std::span<const GroupLabel> votes) {
  if (votes.empty()) Fail(ErrorCode::kInvalidArgument, "majority vote over no votes");
  std::array<std::size_t, kGroupCount> tally{};
  for (GroupLabel vote : votes) ++tally[vote.index()];
  std::size_t best = 0;
  for (std::size_t g = 1; g < kGroupCount; ++g) {
    if (tally[g] > tally[best]) best = g;
  }
  return GroupLabel::FromLetter(static_cast<char>('A' + best));
}

std::vector<GroupLabel> PredictEnsemble(const VotingEnsemble& ensemble,
                                        const SparseMatrix& features, std::size_t threads) {
  if (ensemble.members.empty()) Fail(ErrorCode::kInvalidArgument, "ensemble has no members");
  std::vector<std::vector<GroupLabel>> member_predictions;
  member_predictions.reserve(ensemble.members.size());
  for (const TrainedModel& member : ensemble.members) {
    member_predictions.push_back(Predict(member, features, threads));
  }
  std::vector<GroupLabel> out(features.rows());
  std::vector<GroupLabel> votes(ensemble.members.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    for (std::size_t m = 0; m < votes.size(); ++m) votes[m] = member_predictions[m][r];
    out[r] = MajorityVote(votes);
  }
  return out;
}

std::string SerializeEnsemble(const VotingEnsemble& ensemble) {
  nlohmann::json j;
  j["metadata"] = ensemble.metadata;
  j["members"] = nlohmann::json::array();
  for (const TrainedModel& member : ensemble.members) {
    j["members"].push_back(nlohmann::json::parse(ModelToJson(member)));
  }
  return WrapChecksummed(kEnsembleMagic, 1, j.dump() + "\n");
}

VotingEnsemble ParseEnsemble(std::string_view file) {
  const std::string_view body = UnwrapChecksummed(kEnsembleMagic, 1, file);
  VotingEnsemble ensemble;
  try {
    const nlohmann::json j = nlohmann::json::parse(body);
    ensemble.metadata = j.at("metadata").get<Metadata>();
    for (const nlohmann::json& member : j.at("members")) {
      ensemble.members.push_back(ModelFromJson(member.dump()));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformedLine, std::string("ensemble: ") + e.what());
  }
  if (ensemble.members.empty()) Fail(ErrorCode::kMalformedLine, "ensemble: no members");
  for (const TrainedModel& member : ensemble.members) {
    if (member.width != ensemble.members.front().width) {
      Fail(ErrorCode::kWidthMismatch, "ensemble members disagree on feature width");
    }
  }
  return ensemble;
}

const ClassMetrics* EvaluationReport::Find(GroupLabel label) const {
  for (const ClassMetrics& m : per_class) {
    if (m.label == label) return &m;
  }
  return nullptr;
}

EvaluationReport Evaluate(std::span<const GroupLabel> truth,
                          std::span<const GroupLabel> predicted) {
  if (truth.size() != predicted.size()) {
    Fail(ErrorCode::kLengthMismatch, "truth has " + std::to_string(truth.size()) +
                                         " labels, predictions " +
                                         std::to_string(predicted.size()));
  }
  if (truth.empty()) Fail(ErrorCode::kLengthMismatch, "nothing to evaluate");
  EvaluationReport report;
  report.samples = truth.size();
  std::array<int, kGroupCount> position;
  position.fill(-1);
  for (GroupLabel g : truth) position[g.index()] = 0;
  for (GroupLabel g : predicted) position[g.index()] = 0;
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    if (position[g] == 0) {
      position[g] = static_cast<int>(report.labels.size());
      report.labels.push_back(GroupLabel::FromLetter(static_cast<char>('A' + g)));
    }
  }
  const std::size_t k = report.labels.size();
  report.confusion.assign(k, std::vector<std::uint64_t>(k, 0));
  std::uint64_t correct = 0;
  const GroupLabel a = GroupLabel::FromLetter('A');
  const GroupLabel z = GroupLabel::FromLetter('Z');
  std::uint64_t a_to_z = 0;
  std::uint64_t a_wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++report.confusion[position[truth[i].index()]][position[predicted[i].index()]];
    if (truth[i] == predicted[i]) ++correct;
    if (truth[i] == a) {
      ++report.true_a;
      if (predicted[i] != a) ++a_wrong;
      if (predicted[i] == z) ++a_to_z;
    }
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  report.a_to_z_rate = SafeRatio(static_cast<double>(a_to_z), static_cast<double>(report.true_a));
  report.a_misrouted_rate =
      SafeRatio(static_cast<double>(a_wrong), static_cast<double>(report.true_a));
  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t row = 0;
    std::uint64_t column = 0;
    for (std::size_t o = 0; o < k; ++o) {
      row += report.confusion[c][o];
      column += report.confusion[o][c];
    }
    const auto tp = static_cast<double>(report.confusion[c][c]);
    ClassMetrics m;
    m.label = report.labels[c];
    m.support = row;
    m.precision = SafeRatio(tp, static_cast<double>(column));
    m.recall = SafeRatio(tp, static_cast<double>(row));
    m.f1 = SafeRatio(2.0 * m.precision * m.recall, m.precision + m.recall);
    report.per_class.push_back(m);
  }
  return report;
}

ProtocolReport RunProtocol(const Dataset& dataset, std::size_t runs, std::uint64_t base_seed,
                           double train_fraction, std::size_t threads) {
  if (runs == 0) Fail(ErrorCode::kInvalidArgument, "protocol needs at least one run");
  ProtocolReport out;
  out.base_seed = base_seed;
  out.train_fraction = train_fraction;
  out.rows = dataset.rows.size();
  const SparseMatrix features = dataset.Features();
  const std::vector<GroupLabel> labels = dataset.Labels();
  std::map<GroupLabel, std::vector<double>> f1s;
  double accuracy_sum = 0.0;
  double a_to_z_sum = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    RunResult run;
    run.seed = base_seed + r;
    const SplitIndices split =
        TrainTestSplitIndices(features.rows(), {.train_fraction = train_fraction, .seed = run.seed});
    run.train_rows = split.train.size();
    run.test_rows = split.test.size();
    const SparseMatrix train_x = features.Select(split.train);
    const SparseMatrix test_x = features.Select(split.test);
    std::vector<GroupLabel> train_y;
    std::vector<GroupLabel> test_y;
    for (std::size_t i : split.train) train_y.push_back(labels[i]);
    for (std::size_t i : split.test) test_y.push_back(labels[i]);

    const Stopwatch train_clock;
    const VotingEnsemble ensemble = TrainEnsemble(train_x, train_y, run.seed, threads);
    run.timing.train_wall_seconds = train_clock.WallSeconds();
    run.timing.train_cpu_seconds = train_clock.CpuSeconds();
    const Stopwatch predict_clock;
    const std::vector<GroupLabel> predicted = PredictEnsemble(ensemble, test_x, threads);
    run.timing.predict_wall_seconds = predict_clock.WallSeconds();
    run.timing.predict_cpu_seconds = predict_clock.CpuSeconds();

    run.report = Evaluate(test_y, predicted);
    accuracy_sum += run.report.accuracy;
    a_to_z_sum += run.report.a_to_z_rate;
    out.max_a_misrouted_rate = std::max(out.max_a_misrouted_rate, run.report.a_misrouted_rate);
    for (const ClassMetrics& m : run.report.per_class) f1s[m.label].push_back(m.f1);
    out.runs.push_back(std::move(run));
  }
  out.mean_accuracy = accuracy_sum / static_cast<double>(runs);
  out.mean_a_to_z_rate = a_to_z_sum / static_cast<double>(runs);
  for (const auto& [label, values] : f1s) {
    F1Range range;
    range.min = *std::min_element(values.begin(), values.end());
    range.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    range.mean = sum / static_cast<double>(values.size());
    range.runs = values.size();
    out.f1[label] = range;
  }
  return out;
}

std::string RenderConfusionMatrix(const EvaluationReport& report) {
  std::size_t width = 6;  // strlen("pred:A")
  for (const auto& row : report.confusion) {
    for (std::uint64_t v : row) width = std::max(width, std::to_string(v).size());
  }
  auto pad = [width](const std::string& s) {
    return std::string(width - std::min(width, s.size()), ' ') + s;
  };
  std::string out = std::string(6, ' ');
  for (GroupLabel g : report.labels) out += " " + pad("pred:" + g.str());
  out += "\n";
  for (std::size_t r = 0; r < report.labels.size(); ++r) {
    out += "true:" + report.labels[r].str();
    for (std::uint64_t v : report.confusion[r]) out += " " + pad(std::to_string(v));
    out += "\n";
  }
  return out;
}

std::string RenderClassificationReport(const EvaluationReport& report) {
  std::string out = "class precision recall     f1 support\n";
  auto pad = [](const std::string& s, std::size_t width) {
    return std::string(width - std::min(width, s.size()), ' ') + s;
  };
  for (const ClassMetrics& m : report.per_class) {
    out += pad(m.label.str(), 5) + " " + pad(Fixed4(m.precision), 9) + " " +
           pad(Fixed4(m.recall), 6) + " " + pad(Fixed4(m.f1), 6) + " " +
           pad(std::to_string(m.support), 7) + "\n";
  }
  out += "accuracy=" + Fixed4(report.accuracy) + " samples=" + std::to_string(report.samples) +
         "\n";
  return out;
}

std::string RenderProtocolReport(const ProtocolReport& report, const Metadata& metadata) {
  std::string out;
  for (const auto& [key, value] : metadata) out += "# " + key + "=" + value + "\n";
  out += "runs=" + std::to_string(report.runs.size()) +
         " base_seed=" + std::to_string(report.base_seed) +
         " train_fraction=" + FormatDouble(report.train_fraction) +
         " rows=" + std::to_string(report.rows) + "\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const RunResult& run = report.runs[i];
    out += "\n== run " + std::to_string(i) + " seed=" + std::to_string(run.seed) +
           " train=" + std::to_string(run.train_rows) + " test=" + std::to_string(run.test_rows) +
           " accuracy=" + Fixed4(run.report.accuracy) +
           " a_to_z=" + Fixed4(run.report.a_to_z_rate) +
           " a_misrouted=" + Fixed4(run.report.a_misrouted_rate) + "\n";
    out += RenderClassificationReport(run.report);
    out += RenderConfusionMatrix(run.report);
  }
  out += "\n== summary\nmean_accuracy=" + Fixed4(report.mean_accuracy) +
         " mean_a_to_z=" + Fixed4(report.mean_a_to_z_rate) +
         " max_a_misrouted=" + Fixed4(report.max_a_misrouted_rate) + "\n";
  out += "class f1_min f1_mean f1_max runs\n";
  for (const auto& [label, range] : report.f1) {
    out += label.str() + " " + Fixed4(range.min) + " " + Fixed4(range.mean) + " " +
           Fixed4(range.max) + " " + std::to_string(range.runs) + "\n";
  }
  return out;
}

std::string RenderMetricsCsv(const ProtocolReport& report) {
  std::string out = "metric,class,value\n";
  auto line = [&out](std::string_view metric, std::string_view cls, double value) {
    out += std::string(metric) + "," + std::string(cls) + "," + FormatDouble(value) + "\n";
  };
  line("mean_accuracy", "", report.mean_accuracy);
  line("mean_a_to_z_rate", "", report.mean_a_to_z_rate);
  line("max_a_misrouted_rate", "", report.max_a_misrouted_rate);
  for (const auto& [label, range] : report.f1) {
    line("f1_min", label.str(), range.min);
    line("f1_mean", label.str(), range.mean);
    line("f1_max", label.str(), range.max);
  }
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const std::string run = "run" + std::to_string(i);
    line("accuracy", run, report.runs[i].report.accuracy);
  }
  return out;
}

std::string RenderTimingsCsv(const ProtocolReport& report) {
  std::string out = "run,seed,train_wall_s,train_cpu_s,predict_wall_s,predict_cpu_s\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const RunResult& run = report.runs[i];
    out += std::to_string(i) + "," + std::to_string(run.seed) + "," +
           FormatDouble(run.timing.train_wall_seconds) + "," +
           FormatDouble(run.timing.train_cpu_seconds) + "," +
           FormatDouble(run.timing.predict_wall_seconds) + "," +
           FormatDouble(run.timing.predict_cpu_seconds) + "\n";
  }
  return out;
}

}  // namespace affinity
