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

#include "affinity/feature_pipeline.h"
#include "affinity/random.h"
#include "affinity/status.h"

namespace affinity {
namespace {

DataRow Row(std::uint64_t job, std::uint64_t count, double cpu, double mem,
            std::map<std::string, std::string, std::less<>> labels) {
  DataRow row;
  row.job_id = job;
  row.count = count;
  row.group = ClassifyGroup(static_cast<std::int64_t>(count));
  row.cpu = cpu;
  row.mem = mem;
  row.labels = std::move(labels);
  return row;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

// Random rows over a small label vocabulary.
std::vector<DataRow> RandomRows(Rng& rng, std::size_t n) {
  const std::vector<std::vector<std::string>> vocab = {
      {"W|BW|0:3", "W|BW|4:14", "W|GE|i:2"},
      {"E|GE|i:0"},
      {"AK|NEQ|s:qe,s:qg", "AK|EQ|s:qh"},
      {"D|EQ|e:", "D|EQ|i:1", "D|NEQ|i:4", "D|LT|i:5!i:2"}};
  const std::vector<std::string> names = {"W", "E", "AK", "D"};
  std::vector<DataRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::string, std::string, std::less<>> labels;
    for (std::size_t a = 0; a < names.size(); ++a) {
      if (rng.Bernoulli(0.3)) continue;
      labels[names[a]] = vocab[a][rng.Below(vocab[a].size())];
    }
    rows.push_back(Row(rng.Below(20), 1 + rng.Below(3000), rng.Below(9) / 8.0,
                       rng.Below(5) / 4.0, labels));
  }
  return rows;
}

TEST(DictionaryTest, WidthFollowsCategoryCounts) {
  std::vector<DataRow> rows = {Row(1, 1, 0.5, 0.5, {{"W", "W|BW|0:3"}, {"E", "E|GE|i:0"}}),
                               Row(2, 9, 0.5, 0.5, {{"W", "W|BW|4:14"}, {"E", "E|GE|i:0"}}),
                               Row(3, 9, 0.5, 0.5, {{"E", "E|GE|i:0"}})};
  FeatureDictionary dict = BuildDictionary(rows);
  ASSERT_EQ(dict.blocks().size(), 2u);
  const auto* w = dict.FindBlock("W");
  ASSERT_NE(w, nullptr);
  EXPECT_EQ(w->categories, (std::vector<std::string>{"<none>", "W|BW|0:3", "W|BW|4:14"}));
  EXPECT_EQ(dict.FindBlock("E")->categories, (std::vector<std::string>{"E|GE|i:0"}));
  EXPECT_EQ(dict.width(), 2u + 2u + 0u);
}

TEST(DictionaryTest, EmptyRowsRejected) {
  EXPECT_EQ(CodeOf([] { BuildDictionary({}); }), ErrorCode::kEmptyDataset);
}

TEST(DictionaryTest, DeterministicUnderPermutationAndThreads) {
  Rng rng(5);
  std::vector<DataRow> rows = RandomRows(rng, 500);
  FeatureDictionary base = BuildDictionary(rows, 1);
  std::size_t expected = 2;
  for (const auto& block : base.blocks()) expected += block.categories.size() - 1;
  EXPECT_EQ(base.width(), expected);
  for (int i = 0; i < 5; ++i) {
    rng.Shuffle(std::span<DataRow>(rows));
    EXPECT_EQ(BuildDictionary(rows, 1 + i), base);
  }
}

TEST(EncodeTest, DropFirstAndSingleOne) {
  std::vector<DataRow> rows = {Row(1, 1, 0.25, 0.5, {{"W", "W|BW|0:3"}}),
                               Row(2, 9, 0.0, 0.5, {{"W", "W|BW|4:14"}}), Row(3, 9, 0.0, 0.0, {})};
  FeatureDictionary dict = BuildDictionary(rows);
  EncodedRow first = Encode(rows[2], dict);
  EXPECT_TRUE(first.features.empty());
  EncodedRow second = Encode(rows[0], dict);
  EXPECT_EQ(second.features,
            (std::vector<Feature>{{0, 0.25}, {1, 0.5}, {2, 1.0}}));
  EXPECT_EQ(second.label.letter(), 'A');
  EXPECT_EQ(Encode(rows[1], dict).features, (std::vector<Feature>{{1, 0.5}, {3, 1.0}}));
  EXPECT_EQ(dict.ColumnName(3), "W|BW|4:14");
}

TEST(EncodeTest, UnknownCategory) {
  std::vector<DataRow> rows = {Row(1, 1, 0.25, 0.5, {{"W", "W|BW|0:3"}})};
  FeatureDictionary dict = BuildDictionary(rows);
  EXPECT_EQ(CodeOf([&] { Encode(Row(1, 1, 0, 0, {{"Q", "Q|EQ|i:9"}}), dict); }),
            ErrorCode::kUnknownCategory);
  EXPECT_EQ(CodeOf([&] { Encode(Row(1, 1, 0, 0, {{"W", "W|BW|0:4"}}), dict); }),
            ErrorCode::kUnknownCategory);
  // W has no <none> category because every row constrains it.
  EXPECT_EQ(CodeOf([&] { Encode(Row(1, 1, 0, 0, {}), dict); }), ErrorCode::kUnknownCategory);
}

TEST(EncodeTest, RandomRowsRoundTripAndStayOneHot) {
  Rng rng(9);
  std::vector<DataRow> rows = RandomRows(rng, 400);
  FeatureDictionary dict = BuildDictionary(rows);
  std::vector<EncodedRow> encoded = EncodeAll(rows, dict, 3);
  ASSERT_EQ(encoded, EncodeAll(rows, dict, 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(Decode(encoded[i], dict), rows[i].labels);
    for (std::size_t k = 0; k < encoded[i].features.size(); ++k) {
      const Feature& f = encoded[i].features[k];
      ASSERT_LT(f.index, dict.width());
      if (k > 0) {
        ASSERT_LT(encoded[i].features[k - 1].index, f.index);
      }
      if (f.index >= 2) {
        ASSERT_EQ(f.value, 1.0);
      }
    }
    for (const auto& block : dict.blocks()) {
      int ones = 0;
      for (const Feature& f : encoded[i].features) {
        ones += f.index >= block.offset && f.index < block.offset + block.categories.size() - 1;
      }
      ASSERT_LE(ones, 1);
    }
  }
}

TEST(CompressTest, KnownMultiplicities) {
  std::vector<DataRow> rows;
  for (int i = 0; i < 100; ++i) rows.push_back(Row(7, 3, 0.5, 0.5, {{"E", "E|GE|i:0"}}));
  EXPECT_EQ(Compress(rows).size(), 1u);
  rows.clear();
  for (int i = 0; i < 50; ++i) {
    rows.push_back(Row(7, 3, 0.5, 0.5, {{"E", "E|GE|i:0"}}));
    rows.push_back(Row(7, 3, 0.25, 0.5, {{"E", "E|GE|i:0"}}));
  }
  EXPECT_EQ(Compress(rows).size(), 2u);
}

TEST(CompressTest, ExactDistinctCountAndIdempotent) {
  Rng rng(13);
  std::vector<DataRow> distinct;
  std::vector<DataRow> rows;
  for (std::uint64_t job = 0; job < 40; ++job) {
    const std::size_t configs = 1 + rng.Below(3);
    for (std::size_t c = 0; c < configs; ++c) {
      DataRow row = Row(job, 1 + c, c / 4.0, 0.5, {{"E", "E|GE|i:" + std::to_string(job)}});
      distinct.push_back(row);
      const std::size_t copies = 1 + rng.Below(30);
      for (std::size_t k = 0; k < copies; ++k) {
        row.task_index = static_cast<std::uint32_t>(rows.size());
        rows.push_back(row);
      }
    }
  }
  rng.Shuffle(std::span<DataRow>(rows));
  std::vector<DataRow> once = Compress(rows);
  EXPECT_EQ(once.size(), distinct.size());
  EXPECT_EQ(Compress(once), once);
  for (std::size_t i = 1; i < once.size(); ++i) EXPECT_LE(once[i - 1].job_id, once[i].job_id);
}

TEST(DatasetFileTest, RoundTrip) {
  Rng rng(21);
  std::vector<DataRow> rows = RandomRows(rng, 200);
  Dataset ds;
  ds.dictionary = BuildDictionary(rows);
  ds.rows = EncodeAll(rows, ds.dictionary);
  ds.metadata = {{"seed", "21"}, {"source", "unit"}};
  const std::string text = SerializeDataset(ds);
  EXPECT_EQ(ParseDataset(text), ds);
  EXPECT_EQ(SerializeDataset(ParseDataset(text)), text);
  Dataset empty;
  empty.dictionary = ds.dictionary;
  EXPECT_EQ(ParseDataset(SerializeDataset(empty)), empty);
}

TEST(DatasetFileTest, CorruptionDetected) {
  Rng rng(22);
  std::vector<DataRow> rows = RandomRows(rng, 50);
  Dataset ds;
  ds.dictionary = BuildDictionary(rows);
  ds.rows = EncodeAll(rows, ds.dictionary);
  const std::string text = SerializeDataset(ds);
  for (std::size_t cut : {std::size_t{0}, std::size_t{10}, text.size() / 2, text.size() - 1}) {
    const ErrorCode code = CodeOf([&] { ParseDataset(text.substr(0, cut)); });
    EXPECT_TRUE(code == ErrorCode::kFormatVersionMismatch || code == ErrorCode::kChecksumMismatch);
  }
  std::string other_version = text;
  other_version.replace(other_version.find(" v1 "), 4, " v2 ");
  EXPECT_EQ(CodeOf([&] { ParseDataset(other_version); }), ErrorCode::kFormatVersionMismatch);
}

TEST(RowsFileTest, RoundTrip) {
  Rng rng(23);
  RowsFile file;
  file.rows = RandomRows(rng, 100);
  file.metadata = {{"seed", "1"}};
  const std::string text = SerializeRows(file);
  EXPECT_EQ(ParseRows(text), file);
}

}  // namespace
}  // namespace affinity
