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
#include <set>

#include <gtest/gtest.h>

#include "affinity/random.h"
#include "affinity/status.h"
#include "affinity/text.h"
#include "test_support.h"

namespace affinity {
namespace {

GroupLabel G(char c) { return GroupLabel::FromLetter(c); }

std::vector<GroupLabel> Labels(std::string_view letters) {
  std::vector<GroupLabel> out;
  for (char c : letters) out.push_back(G(c));
  return out;
}

// Dataset over the separable three-class fixture; one attribute supplies
// the columns past cpu and mem.
Dataset SeparableDataset(std::uint64_t seed, std::size_t n) {
  constexpr std::size_t kWidth = 12;
  auto [x, y] = testing::SeparableThreeClass(seed, n, kWidth);
  std::vector<std::string> categories;
  for (std::size_t i = 0; i + 1 < kWidth; ++i) categories.push_back(std::string("c") + static_cast<char>('a' + i));
  Dataset ds;
  ds.dictionary = FeatureDictionary::FromCategories({{"X", categories}});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    EncodedRow row;
    row.label = y[r];
    row.count = y[r] == G('A') ? 1 : (y[r] == G('C') ? 600 : 13000);
    auto features = x.Row(r);
    row.features.assign(features.begin(), features.end());
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

TEST(MajorityVoteTest, Examples) {
  EXPECT_EQ(MajorityVote(Labels("AAZ")), G('A'));
  EXPECT_EQ(MajorityVote(Labels("ACZ")), G('A'));
  EXPECT_EQ(MajorityVote(Labels("ZCC")), G('C'));
  EXPECT_EQ(MajorityVote(Labels("ZZC")), G('Z'));
  EXPECT_EQ(MajorityVote(Labels("ZC")), G('C'));
  EXPECT_THROW(MajorityVote({}), Error);
}

TEST(EvaluateTest, WorkedExample) {
  const auto truth = Labels("AAZZ");
  const auto predicted = Labels("AZZZ");
  const EvaluationReport report = Evaluate(truth, predicted);
  EXPECT_EQ(report.samples, 4u);
  EXPECT_DOUBLE_EQ(report.accuracy, 0.75);
  ASSERT_EQ(report.labels, Labels("AZ"));
  EXPECT_EQ(report.confusion, (std::vector<std::vector<std::uint64_t>>{{1, 1}, {0, 2}}));
  EXPECT_NEAR(report.Find(G('A'))->f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(report.Find(G('Z'))->f1, 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(report.Find(G('A'))->precision, 1.0);
  EXPECT_DOUBLE_EQ(report.Find(G('A'))->recall, 0.5);
  EXPECT_EQ(report.Find(G('Z'))->support, 2u);
  EXPECT_DOUBLE_EQ(report.a_to_z_rate, 0.5);
  EXPECT_DOUBLE_EQ(report.a_misrouted_rate, 0.5);
  EXPECT_EQ(report.true_a, 2u);
  EXPECT_EQ(report.Find(G('B')), nullptr);
}

TEST(EvaluateTest, ZeroDivisionYieldsZero) {
  // C is predicted but never true; B is true but never predicted.
  const EvaluationReport report = Evaluate(Labels("BZ"), Labels("CZ"));
  ASSERT_EQ(report.labels, Labels("BCZ"));
  EXPECT_DOUBLE_EQ(report.Find(G('B'))->precision, 0.0);
  EXPECT_DOUBLE_EQ(report.Find(G('B'))->f1, 0.0);
  EXPECT_DOUBLE_EQ(report.Find(G('C'))->recall, 0.0);
  EXPECT_EQ(report.Find(G('C'))->support, 0u);
  EXPECT_EQ(report.true_a, 0u);
  EXPECT_DOUBLE_EQ(report.a_to_z_rate, 0.0);
  EXPECT_DOUBLE_EQ(report.a_misrouted_rate, 0.0);
}

TEST(EvaluateTest, LengthErrors) {
  try {
    Evaluate(Labels("AB"), Labels("A"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
  EXPECT_THROW(Evaluate({}, {}), Error);
}

TEST(EvaluateTest, RandomLabelInvariants) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.Below(60);
    std::vector<GroupLabel> truth;
    std::vector<GroupLabel> predicted;
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back(G(static_cast<char>('A' + rng.Below(5))));
      predicted.push_back(G(static_cast<char>('A' + rng.Below(5) * 6)));
    }
    const EvaluationReport r = Evaluate(truth, predicted);
    std::uint64_t total = 0;
    std::uint64_t diagonal = 0;
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
      for (std::size_t j = 0; j < r.labels.size(); ++j) total += r.confusion[i][j];
      diagonal += r.confusion[i][i];
    }
    ASSERT_EQ(total, n);
    ASSERT_DOUBLE_EQ(r.accuracy, static_cast<double>(diagonal) / static_cast<double>(n));
    ASSERT_TRUE(std::is_sorted(r.labels.begin(), r.labels.end()));
    std::uint64_t support = 0;
    for (const ClassMetrics& m : r.per_class) {
      support += m.support;
      ASSERT_GE(m.f1, 0.0);
      ASSERT_LE(m.f1, 1.0);
      ASSERT_LE(m.f1, std::max(m.precision, m.recall) + 1e-12);
      ASSERT_GE(m.f1, std::min(m.precision, m.recall) - 1e-12);
    }
    ASSERT_EQ(support, n);
    ASSERT_LE(r.a_to_z_rate, r.a_misrouted_rate);
  }
}

TEST(SplitTest, Sizes) {
  SplitIndices split = TrainTestSplitIndices(27700, {.train_fraction = 0.75, .seed = 3});
  EXPECT_EQ(split.train.size(), 20775u);
  EXPECT_EQ(split.test.size(), 6925u);
  split = TrainTestSplitIndices(4, {});
  EXPECT_EQ(split.train.size(), 3u);
  EXPECT_EQ(split.test.size(), 1u);
  split = TrainTestSplitIndices(2, {.train_fraction = 0.1});
  EXPECT_EQ(split.train.size(), 1u);
  split = TrainTestSplitIndices(3, {.train_fraction = 0.99});
  EXPECT_EQ(split.test.size(), 1u);
}

TEST(SplitTest, Errors) {
  try {
    TrainTestSplitIndices(1, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewRows);
  }
  EXPECT_THROW(TrainTestSplitIndices(10, {.train_fraction = 0.0}), Error);
  EXPECT_THROW(TrainTestSplitIndices(10, {.train_fraction = 1.0}), Error);
}

TEST(SplitTest, PartitionAndDeterminism) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 2 + seed * 7;
    const SplitIndices a = TrainTestSplitIndices(n, {.seed = seed});
    const SplitIndices b = TrainTestSplitIndices(n, {.seed = seed});
    ASSERT_EQ(a.train, b.train);
    ASSERT_EQ(a.test, b.test);
    std::set<std::size_t> all(a.train.begin(), a.train.end());
    all.insert(a.test.begin(), a.test.end());
    ASSERT_EQ(all.size(), n);
    ASSERT_EQ(*all.rbegin(), n - 1);
  }
  EXPECT_NE(TrainTestSplitIndices(100, {.seed = 1}).train,
            TrainTestSplitIndices(100, {.seed = 2}).train);
}

TEST(SplitTest, DatasetSplitKeepsDictionary) {
  const Dataset ds = SeparableDataset(5, 40);
  const auto [train, test] = TrainTestSplit(ds, {.seed = 9});
  EXPECT_EQ(train.rows.size(), 30u);
  EXPECT_EQ(test.rows.size(), 10u);
  EXPECT_EQ(train.dictionary, ds.dictionary);
  EXPECT_EQ(test.dictionary, ds.dictionary);
}

TEST(EnsembleTest, TrainsMembersInOrderWithDerivedSeeds) {
  auto [x, y] = testing::SeparableThreeClass(11, 300);
  const VotingEnsemble ensemble = TrainEnsemble(x, y, 42);
  ASSERT_EQ(ensemble.members.size(), 3u);
  EXPECT_EQ(ensemble.members[0].kind, ClassifierKind::kMlp);
  EXPECT_EQ(ensemble.members[1].kind, ClassifierKind::kRidge);
  EXPECT_EQ(ensemble.members[2].kind, ClassifierKind::kSgdHinge);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(ensemble.members[i].seed, DeriveSeed(42, i));
  EXPECT_EQ(ensemble.width(), x.cols());
  const auto predicted = PredictEnsemble(ensemble, x);
  EXPECT_GE(Accuracy(y, predicted), 0.95);
}

TEST(EnsembleTest, PredictionIsMajorityOfMembers) {
  auto [x, y] = testing::SeparableThreeClass(12, 200);
  const VotingEnsemble ensemble = TrainEnsemble(x, y, 1);
  std::vector<std::vector<GroupLabel>> member;
  for (const TrainedModel& m : ensemble.members) member.push_back(Predict(m, x));
  const auto predicted = PredictEnsemble(ensemble, x);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const GroupLabel votes[] = {member[0][r], member[1][r], member[2][r]};
    ASSERT_EQ(predicted[r], MajorityVote(votes));
  }
}

TEST(EnsembleTest, ThreadCountDoesNotChangeModels) {
  auto [x, y] = testing::SeparableThreeClass(13, 250);
  EXPECT_EQ(TrainEnsemble(x, y, 5, 1), TrainEnsemble(x, y, 5, 4));
}

TEST(EnsembleTest, FileRoundTripAndErrors) {
  auto [x, y] = testing::SeparableThreeClass(14, 150);
  VotingEnsemble ensemble = TrainEnsemble(x, y, 8);
  ensemble.metadata["note"] = "x";
  const std::string file = SerializeEnsemble(ensemble);
  const VotingEnsemble parsed = ParseEnsemble(file);
  EXPECT_EQ(parsed, ensemble);
  EXPECT_EQ(PredictEnsemble(parsed, x), PredictEnsemble(ensemble, x));

  std::string corrupt = file;
  corrupt[corrupt.size() - 5] ^= 1;
  try {
    ParseEnsemble(corrupt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kChecksumMismatch);
  }
  EXPECT_THROW(ParseEnsemble(SerializeModel(ensemble.members[0])), Error);
}

TEST(EnsembleTest, WidthMismatch) {
  auto [x, y] = testing::SeparableThreeClass(15, 100);
  const VotingEnsemble ensemble = TrainEnsemble(x, y, 1);
  SparseMatrix wrong(x.cols() + 1);
  wrong.AddRow(std::vector<Feature>{{0, 1.0}});
  try {
    PredictEnsemble(ensemble, wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWidthMismatch);
  }
}

TEST(ProtocolTest, DeterministicAndThreadIndependent) {
  const Dataset ds = SeparableDataset(21, 400);
  const ProtocolReport a = RunProtocol(ds, 3, 100, 0.75, 1);
  const ProtocolReport b = RunProtocol(ds, 3, 100, 0.75, 4);
  ASSERT_EQ(a.runs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.runs[i].seed, 100 + i);
    EXPECT_EQ(a.runs[i].train_rows, 300u);
    EXPECT_EQ(a.runs[i].test_rows, 100u);
    EXPECT_EQ(a.runs[i].report, b.runs[i].report);
  }
  EXPECT_EQ(RenderProtocolReport(a), RenderProtocolReport(b));
  EXPECT_EQ(RenderMetricsCsv(a), RenderMetricsCsv(b));
  EXPECT_GE(a.mean_accuracy, 0.95);
  double sum = 0.0;
  for (const RunResult& run : a.runs) sum += run.report.accuracy;
  EXPECT_DOUBLE_EQ(a.mean_accuracy, sum / 3.0);
  const F1Range& f1a = a.f1.at(G('A'));
  EXPECT_LE(f1a.min, f1a.mean);
  EXPECT_LE(f1a.mean, f1a.max);
  EXPECT_THROW(RunProtocol(ds, 0, 1), Error);
}

TEST(RenderTest, ConfusionMatrixLayout) {
  const EvaluationReport report = Evaluate(Labels("AAZZ"), Labels("AZZZ"));
  EXPECT_EQ(RenderConfusionMatrix(report),
            "       pred:A pred:Z\n"
            "true:A      1      1\n"
            "true:Z      0      2\n");
}

TEST(RenderTest, ConfusionMatrixWidensForLargeCounts) {
  std::vector<GroupLabel> truth(1234567, G('B'));
  const EvaluationReport report = Evaluate(truth, truth);
  EXPECT_EQ(RenderConfusionMatrix(report),
            "        pred:B\n"
            "true:B 1234567\n");
}

TEST(RenderTest, MetricsCsv) {
  const Dataset ds = SeparableDataset(22, 120);
  const ProtocolReport report = RunProtocol(ds, 2, 7);
  const std::string csv = RenderMetricsCsv(report);
  const auto lines = Split(csv, '\n');
  EXPECT_EQ(lines[0], "metric,class,value");
  EXPECT_EQ(lines[1], "mean_accuracy,," + FormatDouble(report.mean_accuracy));
  EXPECT_NE(csv.find("f1_min,A,"), std::string::npos);
  EXPECT_NE(csv.find("accuracy,run1,"), std::string::npos);
  EXPECT_EQ(Split(RenderTimingsCsv(report), '\n').size(), 4u);
}

}  // namespace
}  // namespace affinity
