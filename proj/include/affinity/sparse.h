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


#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace affinity {

struct Feature {
  std::uint32_t index = 0;
  double value = 0.0;

  bool operator==(const Feature&) const = default;
};

/// Compressed sparse rows with strictly increasing column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(std::size_t cols) : cols_(cols) {}

  /// Appends a row; `features` must be sorted by index and below cols().
  void AddRow(std::span<const Feature> features) {
    entries_.insert(entries_.end(), features.begin(), features.end());
    row_ptr_.push_back(entries_.size());
  }

  std::size_t rows() const { return row_ptr_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return entries_.size(); }
  std::span<const Feature> Row(std::size_t i) const {
    return {entries_.data() + row_ptr_[i], entries_.data() + row_ptr_[i + 1]};
  }

  /// Subset of rows in the given order.
  SparseMatrix Select(std::span<const std::size_t> rows) const {
    SparseMatrix out(cols_);
    for (std::size_t r : rows) out.AddRow(Row(r));
    return out;
  }

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Feature> entries_;
};

inline double SparseDot(std::span<const Feature> row, const double* dense) {
  double sum = 0.0;
  for (const Feature& f : row) sum += f.value * dense[f.index];
  return sum;
}

}  // namespace affinity
