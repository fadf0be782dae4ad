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


#include "affinity/mlp.h"

#include <algorithm>
#include <cmath>

#include "affinity/status.h"

namespace affinity {

namespace {

// Activations of one row: pre-activations and outputs per layer.
struct Trace {
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> a;
};

void Forward(const MlpParams& params, std::span<const Feature> row, Trace& trace) {
  const std::size_t layers = params.layer_count();
  trace.z.resize(layers);
  trace.a.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = params.sizes()[l];
    const std::size_t out = params.sizes()[l + 1];
    const double* w = params.weights(l);
    std::vector<double>& z = trace.z[l];
    z.assign(params.biases(l), params.biases(l) + out);
    if (l == 0) {
      for (const Feature& f : row) {
        const double* wi = w + static_cast<std::size_t>(f.index) * out;
        for (std::size_t j = 0; j < out; ++j) z[j] += f.value * wi[j];
      }
    } else {
      const std::vector<double>& prev = trace.a[l - 1];
      for (std::size_t i = 0; i < in; ++i) {
        if (prev[i] == 0.0) continue;
        const double* wi = w + i * out;
        for (std::size_t j = 0; j < out; ++j) z[j] += prev[i] * wi[j];
      }
    }
    std::vector<double>& a = trace.a[l];
    a.resize(out);
    if (l + 1 < layers) {
      for (std::size_t j = 0; j < out; ++j) a[j] = z[j] > 0.0 ? z[j] : 0.0;
    } else {
      const double peak = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t j = 0; j < out; ++j) sum += (a[j] = std::exp(z[j] - peak));
      for (std::size_t j = 0; j < out; ++j) a[j] /= sum;
    }
  }
}

}  // namespace

MlpParams::MlpParams(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) Fail(ErrorCode::kInvalidArgument, "an MLP needs at least two layers");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) {
      Fail(ErrorCode::kInvalidArgument, "layer sizes must be positive");
    }
    offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  values_.assign(total, 0.0);
}

MlpParams MlpParams::Initialize(std::vector<std::size_t> sizes, Rng& rng) {
  MlpParams params(std::move(sizes));
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const std::size_t in = params.sizes_[l];
    const std::size_t out = params.sizes_[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    double* w = params.weights(l);
    for (std::size_t k = 0; k < in * out + out; ++k) w[k] = rng.Uniform(-bound, bound);
  }
  return params;
}

MlpLossGradient MlpLossAndGradient(const MlpParams& params, const SparseMatrix& inputs,
                                   std::span<const std::uint32_t> targets,
                                   std::span<const std::size_t> batch) {
  if (batch.empty()) Fail(ErrorCode::kInvalidArgument, "empty batch");
  const std::size_t layers = params.layer_count();
  MlpLossGradient result;
  result.gradient.assign(params.values().size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  Trace trace;
  std::vector<std::vector<double>> delta(layers);
  for (std::size_t r : batch) {
    std::span<const Feature> row = inputs.Row(r);
    Forward(params, row, trace);
    const std::uint32_t target = targets[r];
    const std::vector<double>& p = trace.a[layers - 1];
    // log softmax of the target computed from the logits for accuracy.
    const std::vector<double>& logits = trace.z[layers - 1];
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - peak);
    result.loss -= (logits[target] - peak - std::log(sum)) * scale;

    delta[layers - 1].assign(p.begin(), p.end());
    delta[layers - 1][target] -= 1.0;
    for (double& d : delta[layers - 1]) d *= scale;
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = params.sizes()[l];
      const std::size_t out = params.sizes()[l + 1];
      const std::size_t w_offset = static_cast<std::size_t>(params.weights(l) - params.values().data());
      double* gw = result.gradient.data() + w_offset;
      double* gb = gw + in * out;
      const std::vector<double>& d = delta[l];
      for (std::size_t j = 0; j < out; ++j) gb[j] += d[j];
      if (l == 0) {
        for (const Feature& f : row) {
          double* gwi = gw + static_cast<std::size_t>(f.index) * out;
          for (std::size_t j = 0; j < out; ++j) gwi[j] += f.value * d[j];
        }
        break;
      }
      const std::vector<double>& prev = trace.a[l - 1];
      const std::vector<double>& prev_z = trace.z[l - 1];
      const double* w = params.weights(l);
      std::vector<double>& back = delta[l - 1];
      back.assign(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        const double* wi = w + i * out;
        double* gwi = gw + i * out;
        double acc = 0.0;
        for (std::size_t j = 0; j < out; ++j) {
          gwi[j] += prev[i] * d[j];
          acc += wi[j] * d[j];
        }
        back[i] = prev_z[i] > 0.0 ? acc : 0.0;
      }
    }
  }
  if (!std::isfinite(result.loss)) {
    Fail(ErrorCode::kNonFiniteLoss, "cross-entropy loss is not finite");
  }
  return result;
}

std::vector<double> MlpForward(const MlpParams& params, std::span<const Feature> row) {
  Trace trace;
  Forward(params, row, trace);
  return trace.a.back();
}

}  // namespace affinity
