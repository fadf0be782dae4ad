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


// Dataset construction: the category dictionary over canonical constraint
// labels, drop-first one-hot encoding, per-job deduplication and the
// dataset and rows file formats.
//
// Column layout: 0 is cpu, 1 is mem, then one block per constrained
// attribute in name order. Each block lists the attribute's categories in
// lexicographic order; the first category has no column, so a block of k
// categories adds k - 1 columns.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "affinity/matcher.h"
#include "affinity/sparse.h"

namespace affinity {

/// Category for "no constraint on this attribute". Sorts before every label
/// because labels start with an attribute name.
inline constexpr std::string_view kNoneCategory = "<none>";

using Metadata = std::map<std::string, std::string>;

struct DataRow {
  std::uint64_t job_id = 0;
  std::uint32_t task_index = 0;
  std::uint64_t count = 0;
  GroupLabel group;
  double cpu = 0.0;
  double mem = 0.0;
  /// Attribute name to canonical label; unconstrained attributes are absent.
  std::map<std::string, std::string, std::less<>> labels;

  bool operator==(const DataRow&) const = default;
};

/// Row for a snapshot; the group is recomputed from the count.
DataRow MakeDataRow(const SnapshotRow& snapshot);

struct EncodedRow {
  std::uint64_t count = 0;
  GroupLabel label;
  /// Sorted by index; zero values are omitted.
  std::vector<Feature> features;

  bool operator==(const EncodedRow&) const = default;
};

class FeatureDictionary {
 public:
  struct Block {
    std::string attribute;
    std::vector<std::string> categories;
    /// Column of categories[1].
    std::uint32_t offset = 0;

    bool operator==(const Block&) const = default;
  };

  FeatureDictionary() = default;
  /// Categories must be non-empty, sorted and unique; attributes unique.
  /// Throws Error(kInvalidArgument) otherwise.
  static FeatureDictionary FromCategories(
      std::vector<std::pair<std::string, std::vector<std::string>>> attributes);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t width() const { return width_; }
  const Block* FindBlock(std::string_view attribute) const;
  /// Column for `category` of `attribute`, nullopt for a dropped first
  /// category. Throws Error(kUnknownCategory) when either is not present.
  std::optional<std::uint32_t> Column(std::string_view attribute, std::string_view category) const;
  /// `cpu`, `mem`, or the category label owning the column.
  std::string ColumnName(std::uint32_t column) const;

  bool operator==(const FeatureDictionary& other) const { return blocks_ == other.blocks_; }

 private:
  std::vector<Block> blocks_;
  std::size_t width_ = 2;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Throws Error(kEmptyDataset) for no rows. Chunks are reduced in a fixed
/// order, so the result does not depend on `threads`.
FeatureDictionary BuildDictionary(std::span<const DataRow> rows, std::size_t threads = 1);

/// Throws Error(kUnknownCategory) when a label (or an unconstrained
/// attribute lacking `<none>`) is not in the dictionary.
EncodedRow Encode(const DataRow& row, const FeatureDictionary& dictionary);
std::vector<EncodedRow> EncodeAll(std::span<const DataRow> rows,
                                  const FeatureDictionary& dictionary, std::size_t threads = 1);

/// Categorical content of an encoded row: attribute to label, with
/// `<none>` entries left out.
std::map<std::string, std::string, std::less<>> Decode(const EncodedRow& row,
                                                       const FeatureDictionary& dictionary);

/// Within each job, rows with identical labels, cpu, mem and count collapse
/// to their first occurrence. Output is ordered by job id, then by first
/// occurrence.
std::vector<DataRow> Compress(std::span<const DataRow> rows);

struct Dataset {
  FeatureDictionary dictionary;
  std::vector<EncodedRow> rows;
  Metadata metadata;

  SparseMatrix Features() const;
  std::vector<GroupLabel> Labels() const;

  bool operator==(const Dataset&) const = default;
};

/// Compresses `rows`, builds the dictionary over the survivors and encodes
/// them. Throws Error(kEmptyDataset) for no rows.
Dataset BuildDataset(std::span<const DataRow> rows, Metadata metadata, std::size_t threads = 1);

/// Dataset with the rows at `indices`, in that order.
Dataset SelectRows(const Dataset& dataset, std::span<const std::size_t> indices);

inline constexpr std::string_view kDatasetMagic = "affinity-dataset";
inline constexpr std::string_view kRowsMagic = "affinity-rows";

std::string SerializeDataset(const Dataset& dataset);
/// Throws kFormatVersionMismatch, kChecksumMismatch or kMalformedLine.
Dataset ParseDataset(std::string_view file);
void WriteDataset(const Dataset& dataset, const std::string& path);
Dataset ReadDataset(const std::string& path);

struct RowsFile {
  Metadata metadata;
  std::vector<DataRow> rows;

  bool operator==(const RowsFile&) const = default;
};

std::string SerializeRows(const RowsFile& rows);
RowsFile ParseRows(std::string_view file);

}  // namespace affinity
