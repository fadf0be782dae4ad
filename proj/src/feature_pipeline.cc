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


#include "affinity/feature_pipeline.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <json.hpp>

#include "affinity/parallel.h"
#include "affinity/status.h"
#include "affinity/text.h"

namespace affinity {

namespace {

constexpr std::size_t kReduceChunks = 16;
constexpr std::string_view kDatasetHeader = "count,group,cpu,mem,features";
constexpr std::string_view kRowsHeader = "job_id,task_index,count,group,cpu,mem,constraints";

std::string AttributeOfLabel(std::string_view label) {
  const std::size_t bar = label.find('|');
  if (bar == std::string_view::npos || bar == 0) {
    Fail(ErrorCode::kMalformedLine, "not a constraint label: " + std::string(label));
  }
  return std::string(label.substr(0, bar));
}

std::vector<std::string_view> BodyLines(std::string_view body) {
  std::vector<std::string_view> lines = Split(body, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

[[noreturn]] void BadLine(std::size_t line, const std::string& what) {
  Fail(ErrorCode::kMalformedLine, "line " + std::to_string(line) + ": " + what);
}

Metadata ParseMetadataLine(std::string_view line, std::size_t line_number) {
  constexpr std::string_view kPrefix = "#metadata ";
  if (!line.starts_with(kPrefix)) BadLine(line_number, "expected metadata block");
  Metadata out;
  try {
    const nlohmann::json json = nlohmann::json::parse(line.substr(kPrefix.size()));
    for (const auto& [key, value] : json.items()) out[key] = value.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    BadLine(line_number, std::string("metadata: ") + e.what());
  }
  return out;
}

std::string MetadataLine(const Metadata& metadata) {
  nlohmann::json json = nlohmann::json::object();
  for (const auto& [key, value] : metadata) json[key] = value;
  return "#metadata " + json.dump() + "\n";
}

GroupLabel ParseGroup(std::string_view text, std::size_t line) {
  if (text.size() != 1 || text[0] < 'A' || text[0] > 'Z') BadLine(line, "bad group label");
  return GroupLabel::FromLetter(text[0]);
}

double ParseFraction(std::string_view text, std::size_t line) {
  auto v = ParseDouble(text);
  if (!v || !std::isfinite(*v) || *v < 0.0 || *v > 1.0) BadLine(line, "bad cpu/mem value");
  return *v;
}

}  // namespace

DataRow MakeDataRow(const SnapshotRow& snapshot) {
  DataRow row;
  row.job_id = snapshot.task.job_id;
  row.task_index = snapshot.task.task_index;
  row.count = snapshot.count;
  row.group = ClassifyGroup(static_cast<std::int64_t>(snapshot.count));
  row.cpu = snapshot.task.cpu;
  row.mem = snapshot.task.mem;
  for (const auto& [attribute, c] : snapshot.constraints.entries) {
    row.labels.emplace(attribute, CanonicalLabel(c));
  }
  return row;
}

FeatureDictionary FeatureDictionary::FromCategories(
    std::vector<std::pair<std::string, std::vector<std::string>>> attributes) {
  std::sort(attributes.begin(), attributes.end());
  FeatureDictionary dict;
  for (auto& [attribute, categories] : attributes) {
    if (categories.empty() || !std::is_sorted(categories.begin(), categories.end()) ||
        std::adjacent_find(categories.begin(), categories.end()) != categories.end()) {
      Fail(ErrorCode::kInvalidArgument,
           "categories of " + attribute + " must be non-empty, sorted and unique");
    }
    if (!dict.index_.emplace(attribute, dict.blocks_.size()).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate attribute " + attribute);
    }
    Block block{attribute, std::move(categories), static_cast<std::uint32_t>(dict.width_)};
    dict.width_ += block.categories.size() - 1;
    dict.blocks_.push_back(std::move(block));
  }
  return dict;
}

const FeatureDictionary::Block* FeatureDictionary::FindBlock(std::string_view attribute) const {
  auto it = index_.find(std::string(attribute));
  return it == index_.end() ? nullptr : &blocks_[it->second];
}

std::optional<std::uint32_t> FeatureDictionary::Column(std::string_view attribute,
                                                       std::string_view category) const {
  const Block* block = FindBlock(attribute);
  if (block == nullptr) {
    Fail(ErrorCode::kUnknownCategory, "attribute not in dictionary: " + std::string(attribute));
  }
  auto it = std::lower_bound(block->categories.begin(), block->categories.end(), category);
  if (it == block->categories.end() || *it != category) {
    Fail(ErrorCode::kUnknownCategory, "category not in dictionary: " + std::string(category));
  }
  const auto position = static_cast<std::uint32_t>(it - block->categories.begin());
  if (position == 0) return std::nullopt;
  return block->offset + position - 1;
}

std::string FeatureDictionary::ColumnName(std::uint32_t column) const {
  if (column == 0) return "cpu";
  if (column == 1) return "mem";
  for (const Block& block : blocks_) {
    if (column >= block.offset && column < block.offset + block.categories.size() - 1) {
      return block.categories[column - block.offset + 1];
    }
  }
  Fail(ErrorCode::kWidthMismatch, "column " + std::to_string(column) + " beyond width");
}

FeatureDictionary BuildDictionary(std::span<const DataRow> rows, std::size_t threads) {
  if (rows.empty()) Fail(ErrorCode::kEmptyDataset, "cannot build a dictionary from no rows");
  using Census = std::map<std::string, std::pair<std::set<std::string>, std::size_t>>;
  std::vector<Census> partial(kReduceChunks);
  ParallelChunks(rows.size(), kReduceChunks, threads,
                 [&](std::size_t begin, std::size_t end, std::size_t chunk) {
                   Census& census = partial[chunk];
                   for (std::size_t i = begin; i < end; ++i) {
                     for (const auto& [attribute, label] : rows[i].labels) {
                       auto& entry = census[attribute];
                       entry.first.insert(label);
                       ++entry.second;
                     }
                   }
                 });
  Census merged;
  for (Census& census : partial) {
    for (auto& [attribute, entry] : census) {
      auto& target = merged[attribute];
      target.first.merge(entry.first);
      target.second += entry.second;
    }
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> attributes;
  for (auto& [attribute, entry] : merged) {
    std::vector<std::string> categories(entry.first.begin(), entry.first.end());
    if (entry.second < rows.size()) {
      categories.insert(categories.begin(), std::string(kNoneCategory));
    }
    attributes.emplace_back(attribute, std::move(categories));
  }
  return FeatureDictionary::FromCategories(std::move(attributes));
}

EncodedRow Encode(const DataRow& row, const FeatureDictionary& dictionary) {
  EncodedRow out;
  out.count = row.count;
  out.label = row.group;
  if (row.cpu != 0.0) out.features.push_back({0, row.cpu});
  if (row.mem != 0.0) out.features.push_back({1, row.mem});
  for (const auto& [attribute, label] : row.labels) {
    if (dictionary.FindBlock(attribute) == nullptr) {
      Fail(ErrorCode::kUnknownCategory, "attribute not in dictionary: " + attribute);
    }
  }
  for (const FeatureDictionary::Block& block : dictionary.blocks()) {
    auto it = row.labels.find(block.attribute);
    const std::string_view category =
        it == row.labels.end() ? kNoneCategory : std::string_view(it->second);
    if (auto column = dictionary.Column(block.attribute, category)) {
      out.features.push_back({*column, 1.0});
    }
  }
  return out;
}

std::vector<EncodedRow> EncodeAll(std::span<const DataRow> rows,
                                  const FeatureDictionary& dictionary, std::size_t threads) {
  std::vector<EncodedRow> out(rows.size());
  ParallelFor(rows.size(), threads, [&](std::size_t i) { out[i] = Encode(rows[i], dictionary); });
  return out;
}

std::map<std::string, std::string, std::less<>> Decode(const EncodedRow& row,
                                                       const FeatureDictionary& dictionary) {
  std::map<std::string, std::string, std::less<>> labels;
  std::size_t next = 0;
  for (const FeatureDictionary::Block& block : dictionary.blocks()) {
    const std::uint32_t end = block.offset + static_cast<std::uint32_t>(block.categories.size()) - 1;
    while (next < row.features.size() && row.features[next].index < block.offset) ++next;
    std::string_view category = block.categories.front();
    std::size_t hits = 0;
    for (std::size_t i = next; i < row.features.size() && row.features[i].index < end; ++i) {
      if (row.features[i].value == 0.0) continue;
      if (row.features[i].value != 1.0) {
        Fail(ErrorCode::kInvalidArgument, "one-hot value is not 1");
      }
      category = block.categories[row.features[i].index - block.offset + 1];
      ++hits;
    }
    if (hits > 1) {
      Fail(ErrorCode::kInvalidArgument, "more than one category set for " + block.attribute);
    }
    if (category != kNoneCategory) labels.emplace(block.attribute, std::string(category));
  }
  return labels;
}

std::vector<DataRow> Compress(std::span<const DataRow> rows) {
  std::map<std::uint64_t, std::vector<const DataRow*>> by_job;
  for (const DataRow& row : rows) {
    std::vector<const DataRow*>& kept = by_job[row.job_id];
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const DataRow* k) {
      return k->labels == row.labels && k->cpu == row.cpu && k->mem == row.mem &&
             k->count == row.count;
    });
    if (!duplicate) kept.push_back(&row);
  }
  std::vector<DataRow> out;
  for (const auto& [job, kept] : by_job) {
    for (const DataRow* row : kept) out.push_back(*row);
  }
  return out;
}

SparseMatrix Dataset::Features() const {
  SparseMatrix matrix(dictionary.width());
  for (const EncodedRow& row : rows) matrix.AddRow(row.features);
  return matrix;
}

std::vector<GroupLabel> Dataset::Labels() const {
  std::vector<GroupLabel> labels;
  labels.reserve(rows.size());
  for (const EncodedRow& row : rows) labels.push_back(row.label);
  return labels;
}

Dataset BuildDataset(std::span<const DataRow> rows, Metadata metadata, std::size_t threads) {
  const std::vector<DataRow> compressed = Compress(rows);
  Dataset dataset;
  dataset.dictionary = BuildDictionary(compressed, threads);
  dataset.rows = EncodeAll(compressed, dataset.dictionary, threads);
  dataset.metadata = std::move(metadata);
  return dataset;
}

Dataset SelectRows(const Dataset& dataset, std::span<const std::size_t> indices) {
  Dataset out;
  out.dictionary = dataset.dictionary;
  out.metadata = dataset.metadata;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(dataset.rows[i]);
  return out;
}

std::string SerializeDataset(const Dataset& dataset) {
  std::string body = MetadataLine(dataset.metadata);
  nlohmann::json attributes = nlohmann::json::array();
  for (const FeatureDictionary::Block& block : dataset.dictionary.blocks()) {
    attributes.push_back({{"name", block.attribute}, {"categories", block.categories}});
  }
  const nlohmann::json dict = {{"width", dataset.dictionary.width()}, {"attributes", attributes}};
  body += "#dictionary " + dict.dump() + "\n";
  body += kDatasetHeader;
  body += '\n';
  for (const EncodedRow& row : dataset.rows) {
    double cpu = 0.0;
    double mem = 0.0;
    std::string features;
    for (const Feature& f : row.features) {
      if (f.index == 0) {
        cpu = f.value;
      } else if (f.index == 1) {
        mem = f.value;
      } else {
        if (!features.empty()) features += ';';
        features += std::to_string(f.index) + ":" + FormatDouble(f.value);
      }
    }
    body += std::to_string(row.count) + "," + row.label.str() + "," + FormatDouble(cpu) + "," +
            FormatDouble(mem) + "," + features + "\n";
  }
  return WrapChecksummed(kDatasetMagic, 1, body);
}

Dataset ParseDataset(std::string_view file) {
  const std::vector<std::string_view> lines = BodyLines(UnwrapChecksummed(kDatasetMagic, 1, file));
  // Line numbers count the checksum line as line 1.
  if (lines.size() < 3) BadLine(lines.size() + 2, "truncated dataset header");
  Dataset dataset;
  dataset.metadata = ParseMetadataLine(lines[0], 2);
  constexpr std::string_view kDictPrefix = "#dictionary ";
  if (!lines[1].starts_with(kDictPrefix)) BadLine(3, "expected dictionary block");
  try {
    const nlohmann::json dict = nlohmann::json::parse(lines[1].substr(kDictPrefix.size()));
    std::vector<std::pair<std::string, std::vector<std::string>>> attributes;
    for (const auto& a : dict.at("attributes")) {
      attributes.emplace_back(a.at("name").get<std::string>(),
                              a.at("categories").get<std::vector<std::string>>());
    }
    dataset.dictionary = FeatureDictionary::FromCategories(std::move(attributes));
    if (dict.at("width").get<std::size_t>() != dataset.dictionary.width()) {
      BadLine(3, "dictionary width disagrees with its categories");
    }
  } catch (const nlohmann::json::exception& e) {
    BadLine(3, std::string("dictionary: ") + e.what());
  }
  if (lines[2] != kDatasetHeader) BadLine(4, "unexpected column header");
  const std::size_t width = dataset.dictionary.width();
  for (std::size_t i = 3; i < lines.size(); ++i) {
    const std::size_t line = i + 2;
    auto fields = SplitPrefix(lines[i], ',', 4);
    if (!fields) BadLine(line, "expected 5 fields");
    EncodedRow row;
    auto count = ParseUint64((*fields)[0]);
    if (!count || *count == 0) BadLine(line, "bad count");
    row.count = *count;
    row.label = ParseGroup((*fields)[1], line);
    if (row.label != ClassifyGroup(static_cast<std::int64_t>(row.count))) {
      BadLine(line, "group does not match count");
    }
    const double cpu = ParseFraction((*fields)[2], line);
    const double mem = ParseFraction((*fields)[3], line);
    if (cpu != 0.0) row.features.push_back({0, cpu});
    if (mem != 0.0) row.features.push_back({1, mem});
    if (!(*fields)[4].empty()) {
      for (std::string_view pair : Split((*fields)[4], ';')) {
        const std::size_t colon = pair.find(':');
        if (colon == std::string_view::npos) BadLine(line, "bad feature pair");
        auto index = ParseUint64(pair.substr(0, colon));
        auto value = ParseDouble(pair.substr(colon + 1));
        if (!index || !value || !std::isfinite(*value) || *index < 2) {
          BadLine(line, "bad feature pair");
        }
        if (*index >= width) {
          Fail(ErrorCode::kWidthMismatch, "line " + std::to_string(line) + ": feature index " +
                                              std::to_string(*index) + " beyond width");
        }
        if (row.features.size() > 0 && row.features.back().index >= *index) {
          BadLine(line, "feature indices must increase");
        }
        row.features.push_back({static_cast<std::uint32_t>(*index), *value});
      }
    }
    dataset.rows.push_back(std::move(row));
  }
  return dataset;
}

void WriteDataset(const Dataset& dataset, const std::string& path) {
  WriteFile(path, SerializeDataset(dataset));
}

Dataset ReadDataset(const std::string& path) { return ParseDataset(ReadFile(path)); }

std::string SerializeRows(const RowsFile& rows) {
  std::string body = MetadataLine(rows.metadata);
  body += kRowsHeader;
  body += '\n';
  for (const DataRow& row : rows.rows) {
    std::string labels;
    for (const auto& [attribute, label] : row.labels) {
      if (!labels.empty()) labels += ';';
      labels += label;
    }
    body += std::to_string(row.job_id) + "," + std::to_string(row.task_index) + "," +
            std::to_string(row.count) + "," + row.group.str() + "," + FormatDouble(row.cpu) +
            "," + FormatDouble(row.mem) + "," + labels + "\n";
  }
  return WrapChecksummed(kRowsMagic, 1, body);
}

RowsFile ParseRows(std::string_view file) {
  const std::vector<std::string_view> lines = BodyLines(UnwrapChecksummed(kRowsMagic, 1, file));
  if (lines.size() < 2) BadLine(lines.size() + 2, "truncated rows header");
  RowsFile out;
  out.metadata = ParseMetadataLine(lines[0], 2);
  if (lines[1] != kRowsHeader) BadLine(3, "unexpected column header");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const std::size_t line = i + 2;
    auto fields = SplitPrefix(lines[i], ',', 6);
    if (!fields) BadLine(line, "expected 7 fields");
    DataRow row;
    auto job = ParseUint64((*fields)[0]);
    auto index = ParseUint64((*fields)[1]);
    auto count = ParseUint64((*fields)[2]);
    if (!job || !index || *index > UINT32_MAX || !count || *count == 0) {
      BadLine(line, "bad task key or count");
    }
    row.job_id = *job;
    row.task_index = static_cast<std::uint32_t>(*index);
    row.count = *count;
    row.group = ParseGroup((*fields)[3], line);
    if (row.group != ClassifyGroup(static_cast<std::int64_t>(row.count))) {
      BadLine(line, "group does not match count");
    }
    row.cpu = ParseFraction((*fields)[4], line);
    row.mem = ParseFraction((*fields)[5], line);
    if (!(*fields)[6].empty()) {
      for (std::string_view label : Split((*fields)[6], ';')) {
        if (!row.labels.emplace(AttributeOfLabel(label), std::string(label)).second) {
          BadLine(line, "two labels for one attribute");
        }
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace affinity
