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


// Multiclass classifiers over sparse encoded rows.
//
//   RIDGE      one-vs-rest ridge regression on +1/-1 targets, no intercept,
//              solved exactly from the normal equations.
//   SGD_HINGE  one-vs-rest linear SVM (hinge loss, L2 penalty), no
//              intercept, trained by SGD with eta_t = eta0 / (1 + eta0 * alpha * t).
//   MLP        in -> 30 -> 30 -> classes, ReLU, softmax, Adam.
//   KNN        k nearest training rows by Euclidean distance, 1/d weights.
//   TREE       CART with Gini impurity and balanced class weights.
//   GNB        Gaussian naive Bayes.
//
// Class indices follow the sorted list of labels seen in training, and every
// argmax breaks ties toward the lowest index, i.e. the smallest label.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affinity/feature_pipeline.h"
#include "affinity/matcher.h"
#include "affinity/mlp.h"
#include "affinity/sparse.h"

namespace affinity {

enum class ClassifierKind { kRidge, kSgdHinge, kMlp, kKnn, kTree, kGnb };

std::string_view ClassifierKindName(ClassifierKind kind);
/// Accepts RIDGE, SGD_HINGE, MLP, KNN, TREE, GNB. Throws kInvalidArgument.
ClassifierKind ParseClassifierKind(std::string_view name);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kRidge;
  std::uint64_t seed = 0;

  double ridge_alpha = 0.3;

  double sgd_alpha = 1e-4;
  int sgd_epochs = 100;
  double sgd_eta0 = 0.1;

  std::vector<std::size_t> mlp_hidden = {30, 30};
  int mlp_epochs = 200;
  std::size_t mlp_batch = 200;
  double mlp_learning_rate = 1e-3;
  double mlp_beta1 = 0.9;
  double mlp_beta2 = 0.999;
  double mlp_epsilon = 1e-8;
  double mlp_tolerance = 1e-4;
  int mlp_patience = 10;

  std::size_t knn_k = 3;

  int tree_max_depth = 15;

  double gnb_var_smoothing = 1e-9;

  /// Permits training on a single class; used by tests only.
  bool allow_single_class = false;
  /// Worker cap for training and prediction; 0 means hardware concurrency.
  /// Results do not depend on it.
  std::size_t threads = 1;

  /// Throws Error(kInvalidArgument) for out-of-range hyperparameters.
  void Validate() const;
};

struct TreeNode {
  /// -1 for leaves.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t depth = 0;
  /// Weighted class totals of the training rows reaching the node.
  std::vector<double> distribution;
  std::uint32_t prediction = 0;

  bool operator==(const TreeNode&) const = default;
};

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::kRidge;
  std::vector<GroupLabel> classes;
  std::size_t width = 0;
  std::uint64_t seed = 0;
  int epochs_run = 0;
  double final_loss = 0.0;
  Metadata metadata;

  /// RIDGE, SGD_HINGE: classes x width, row-major.
  std::vector<double> linear_weights;
  /// MLP.
  MlpParams mlp;
  /// KNN.
  std::size_t knn_k = 0;
  SparseMatrix knn_rows;
  std::vector<std::uint32_t> knn_targets;
  /// TREE; node 0 is the root.
  std::vector<TreeNode> tree;
  /// GNB: log priors per class, means and variances classes x width.
  std::vector<double> gnb_log_prior;
  std::vector<double> gnb_means;
  std::vector<double> gnb_variances;

  bool operator==(const TrainedModel& other) const;
};

/// Throws kLengthMismatch, kDegenerateData (no rows, no features, or a
/// single class without allow_single_class) and kNonFiniteLoss.
TrainedModel Train(const ClassifierSpec& spec, const SparseMatrix& features,
                   std::span<const GroupLabel> labels);
TrainedModel Train(const ClassifierSpec& spec, const Dataset& dataset);

/// Per-class scores whose argmax is the prediction.
std::vector<double> DecisionValues(const TrainedModel& model, std::span<const Feature> row);

/// Throws Error(kWidthMismatch) when the width differs from the model's.
std::vector<GroupLabel> Predict(const TrainedModel& model, const SparseMatrix& features,
                                std::size_t threads = 1);

/// Index of the largest value; the first one on ties.
std::size_t ArgMax(std::span<const double> values);

/// Training-set accuracy helper.
double Accuracy(std::span<const GroupLabel> truth, std::span<const GroupLabel> predicted);

inline constexpr std::string_view kModelMagic = "affinity-model";

/// JSON value of a model; doubles are written with round-trip precision.
std::string ModelToJson(const TrainedModel& model);
TrainedModel ModelFromJson(std::string_view json);
std::string SerializeModel(const TrainedModel& model);
TrainedModel ParseModel(std::string_view file);

}  // namespace affinity
