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


// Fully connected ReLU network with a softmax output, trained on sparse
// inputs with mean cross-entropy.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "affinity/random.h"
#include "affinity/sparse.h"

namespace affinity {

/// All weights and biases in one flat vector. Layer l maps sizes[l] inputs to
/// sizes[l + 1] outputs; its weights are stored input-major
/// (w[i * out + j]) followed by its biases.
class MlpParams {
 public:
  MlpParams() = default;
  explicit MlpParams(std::vector<std::size_t> sizes);

  /// Glorot-uniform weights and biases, bound sqrt(6 / (fan_in + fan_out)).
  static MlpParams Initialize(std::vector<std::size_t> sizes, Rng& rng);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t layer_count() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }

  double* weights(std::size_t layer) { return values_.data() + offsets_[layer]; }
  const double* weights(std::size_t layer) const { return values_.data() + offsets_[layer]; }
  double* biases(std::size_t layer) { return weights(layer) + sizes_[layer] * sizes_[layer + 1]; }
  const double* biases(std::size_t layer) const {
    return weights(layer) + sizes_[layer] * sizes_[layer + 1];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const MlpParams& other) const {
    return sizes_ == other.sizes_ && values_ == other.values_;
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

struct MlpLossGradient {
  double loss = 0.0;
  /// Same layout as the parameters.
  std::vector<double> gradient;
};

/// Mean cross-entropy of the rows in `batch` and its gradient. `targets`
/// holds a class index per row of `inputs`. Throws Error(kNonFiniteLoss).
MlpLossGradient MlpLossAndGradient(const MlpParams& params, const SparseMatrix& inputs,
                                   std::span<const std::uint32_t> targets,
                                   std::span<const std::size_t> batch);

/// Softmax output for one row.
std::vector<double> MlpForward(const MlpParams& params, std::span<const Feature> row);

}  // namespace affinity
