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


#include "affinity/classifiers.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "affinity/parallel.h"
#include "affinity/random.h"
#include "affinity/status.h"
#include "affinity/text.h"

namespace affinity {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Targets {
  std::vector<GroupLabel> classes;
  std::vector<std::uint32_t> index;
};

Targets IndexLabels(std::span<const GroupLabel> labels) {
  Targets t;
  t.classes.assign(labels.begin(), labels.end());
  std::sort(t.classes.begin(), t.classes.end());
  t.classes.erase(std::unique(t.classes.begin(), t.classes.end()), t.classes.end());
  t.index.reserve(labels.size());
  for (const GroupLabel& label : labels) {
    t.index.push_back(static_cast<std::uint32_t>(
        std::lower_bound(t.classes.begin(), t.classes.end(), label) - t.classes.begin()));
  }
  return t;
}

double FeatureValue(std::span<const Feature> row, std::uint32_t index) {
  auto it = std::lower_bound(row.begin(), row.end(), index,
                             [](const Feature& f, std::uint32_t i) { return f.index < i; });
  return it != row.end() && it->index == index ? it->value : 0.0;
}

void CheckFinite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) Fail(ErrorCode::kNonFiniteLoss, std::string(what) + " diverged");
  }
}

// ---------------------------------------------------------------- RIDGE

void FitRidge(const ClassifierSpec& spec, const SparseMatrix& x, const Targets& t,
              TrainedModel& model) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = t.classes.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(x.nonzeros());
  for (std::size_t r = 0; r < n; ++r) {
    for (const Feature& f : x.Row(r)) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(f.index), f.value);
    }
  }
  Eigen::SparseMatrix<double> xs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  xs.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseMatrix<double> gram = (xs.transpose() * xs).pruned();
  Eigen::SparseMatrix<double> identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  identity.setIdentity();
  gram += spec.ridge_alpha * identity;

  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(k), -1.0);
  for (std::size_t r = 0; r < n; ++r) y(static_cast<Eigen::Index>(r), t.index[r]) = 1.0;
  const Eigen::MatrixXd rhs = xs.transpose() * y;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(gram);
  if (solver.info() != Eigen::Success) {
    Fail(ErrorCode::kDegenerateData, "ridge normal equations could not be factorized");
  }
  Eigen::MatrixXd w = solver.solve(rhs);
  // Iterative refinement keeps the residual at round-off level.
  for (int round = 0; round < 3; ++round) {
    const Eigen::MatrixXd residual = rhs - gram * w;
    bool converged = true;
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      if (residual.col(c).norm() > 1e-10 * (1.0 + rhs.col(c).norm())) converged = false;
    }
    if (converged) break;
    w += solver.solve(residual);
  }
  model.linear_weights.assign(k * d, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < d; ++f) {
      model.linear_weights[c * d + f] = w(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c));
    }
  }
  CheckFinite(model.linear_weights, "ridge solution");
}

// ------------------------------------------------------------ SGD_HINGE

void FitSgd(const ClassifierSpec& spec, const SparseMatrix& x, const Targets& t,
            TrainedModel& model) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = t.classes.size();
  model.linear_weights.assign(k * d, 0.0);
  ParallelFor(k, spec.threads, [&](std::size_t c) {
    Rng rng(spec.seed);
    std::vector<double> v(d, 0.0);
    double scale = 1.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t step = 0;
    for (int epoch = 0; epoch < spec.sgd_epochs; ++epoch) {
      rng.Shuffle(std::span<std::size_t>(order));
      for (std::size_t r : order) {
        const double eta =
            spec.sgd_eta0 / (1.0 + spec.sgd_eta0 * spec.sgd_alpha * static_cast<double>(step++));
        const double target = t.index[r] == c ? 1.0 : -1.0;
        std::span<const Feature> row = x.Row(r);
        const double margin = target * scale * SparseDot(row, v.data());
        scale *= 1.0 - eta * spec.sgd_alpha;
        if (margin < 1.0) {
          const double g = eta * target / scale;
          for (const Feature& f : row) v[f.index] += g * f.value;
        }
        if (scale < 1e-9) {
          for (double& value : v) value *= scale;
          scale = 1.0;
        }
      }
      if (!std::isfinite(scale)) Fail(ErrorCode::kNonFiniteLoss, "hinge SGD diverged");
    }
    for (std::size_t f = 0; f < d; ++f) model.linear_weights[c * d + f] = v[f] * scale;
  });
  CheckFinite(model.linear_weights, "hinge SGD");
  model.epochs_run = spec.sgd_epochs;
}

// ------------------------------------------------------------------ MLP

void FitMlp(const ClassifierSpec& spec, const SparseMatrix& x, const Targets& t,
            TrainedModel& model) {
  const std::size_t n = x.rows();
  Rng rng(spec.seed);
  std::vector<std::size_t> sizes = {x.cols()};
  sizes.insert(sizes.end(), spec.mlp_hidden.begin(), spec.mlp_hidden.end());
  sizes.push_back(t.classes.size());
  MlpParams params = MlpParams::Initialize(sizes, rng);
  std::vector<double>& theta = params.values();
  std::vector<double> m(theta.size(), 0.0);
  std::vector<double> v(theta.size(), 0.0);
  const std::size_t batch = std::min(spec.mlp_batch, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::uint64_t step = 0;
  double loss = 0.0;
  int epoch = 0;
  while (epoch < spec.mlp_epochs) {
    rng.Shuffle(std::span<std::size_t>(order));
    loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      MlpLossGradient lg = MlpLossAndGradient(params, x, t.index, rows);
      loss += lg.loss * static_cast<double>(rows.size());
      ++step;
      const double c1 = 1.0 - std::pow(spec.mlp_beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(spec.mlp_beta2, static_cast<double>(step));
      const double lr = spec.mlp_learning_rate * std::sqrt(c2) / c1;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = lg.gradient[i];
        m[i] = spec.mlp_beta1 * m[i] + (1.0 - spec.mlp_beta1) * g;
        v[i] = spec.mlp_beta2 * v[i] + (1.0 - spec.mlp_beta2) * g * g;
        theta[i] -= lr * m[i] / (std::sqrt(v[i]) + spec.mlp_epsilon);
      }
    }
    loss /= static_cast<double>(n);
    ++epoch;
    if (!std::isfinite(loss)) Fail(ErrorCode::kNonFiniteLoss, "MLP loss is not finite");
    if (loss > best - spec.mlp_tolerance) {
      ++stale;
    } else {
      stale = 0;
    }
    best = std::min(best, loss);
    if (stale >= spec.mlp_patience) break;
  }
  CheckFinite(theta, "MLP parameters");
  model.mlp = std::move(params);
  model.epochs_run = epoch;
  model.final_loss = loss;
}

// ------------------------------------------------------------------ KNN

double SquaredDistance(std::span<const Feature> a, std::span<const Feature> b) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    double diff;
    if (j == b.size() || (i < a.size() && a[i].index < b[j].index)) {
      diff = a[i++].value;
    } else if (i == a.size() || b[j].index < a[i].index) {
      diff = b[j++].value;
    } else {
      diff = a[i++].value - b[j++].value;
    }
    sum += diff * diff;
  }
  return sum;
}

std::vector<double> KnnVotes(const TrainedModel& model, std::span<const Feature> row) {
  const std::size_t n = model.knn_rows.rows();
  std::vector<std::pair<double, std::size_t>> distances(n);
  for (std::size_t i = 0; i < n; ++i) {
    distances[i] = {std::sqrt(SquaredDistance(row, model.knn_rows.Row(i))), i};
  }
  const std::size_t k = std::min(model.knn_k, n);
  std::partial_sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(k),
                    distances.end());
  std::vector<double> votes(model.classes.size(), 0.0);
  const bool exact = distances[0].first == 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto [distance, index] = distances[i];
    if (exact) {
      if (distance == 0.0) votes[model.knn_targets[index]] += 1.0;
    } else {
      votes[model.knn_targets[index]] += 1.0 / distance;
    }
  }
  return votes;
}

// ----------------------------------------------------------------- TREE

struct SplitChoice {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

double Gini(std::span<const double> totals, double weight) {
  if (weight <= 0.0) return 0.0;
  double sum = 0.0;
  for (double w : totals) sum += (w / weight) * (w / weight);
  return 1.0 - sum;
}

class TreeBuilder {
 public:
  TreeBuilder(const ClassifierSpec& spec, const SparseMatrix& x, const Targets& t)
      : spec_(spec), x_(x), t_(t), k_(t.classes.size()) {
    std::vector<double> counts(k_, 0.0);
    for (std::uint32_t c : t.index) counts[c] += 1.0;
    class_weight_.resize(k_);
    for (std::size_t c = 0; c < k_; ++c) {
      class_weight_[c] = static_cast<double>(x.rows()) / (static_cast<double>(k_) * counts[c]);
    }
  }

  std::vector<TreeNode> Build() {
    std::vector<std::size_t> all(x_.rows());
    std::iota(all.begin(), all.end(), 0);
    Grow(all, 0);
    return std::move(nodes_);
  }

 private:
  std::int32_t Grow(const std::vector<std::size_t>& rows, std::uint32_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    TreeNode node;
    node.depth = depth;
    node.distribution.assign(k_, 0.0);
    for (std::size_t r : rows) node.distribution[t_.index[r]] += class_weight_[t_.index[r]];
    node.prediction = static_cast<std::uint32_t>(ArgMax(node.distribution));
    const double weight = std::accumulate(node.distribution.begin(), node.distribution.end(), 0.0);
    std::size_t present = 0;
    for (double w : node.distribution) present += w > 0.0;
    if (static_cast<int>(depth) < spec_.tree_max_depth && rows.size() >= 2 && present > 1) {
      const SplitChoice split = BestSplit(rows, node.distribution, weight);
      if (split.feature >= 0) {
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : rows) {
          (FeatureValue(x_.Row(r), static_cast<std::uint32_t>(split.feature)) <= split.threshold
               ? left
               : right)
              .push_back(r);
        }
        node.feature = split.feature;
        node.threshold = split.threshold;
        nodes_[id] = node;
        const std::int32_t l = Grow(left, depth + 1);
        const std::int32_t r = Grow(right, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
      }
    }
    nodes_[id] = std::move(node);
    return id;
  }

  // Scans every feature in index order; a later feature must be strictly
  // better to win.
  SplitChoice BestSplit(const std::vector<std::size_t>& rows, const std::vector<double>& totals,
                        double weight) const {
    struct Entry {
      std::uint32_t feature;
      double value;
      std::uint32_t target;
    };
    std::vector<Entry> entries;
    for (std::size_t r : rows) {
      for (const Feature& f : x_.Row(r)) {
        if (f.value != 0.0) entries.push_back({f.index, f.value, t_.index[r]});
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.feature != b.feature ? a.feature < b.feature : a.value < b.value;
    });
    SplitChoice best;
    std::vector<double> nonzero(k_);
    std::vector<double> left(k_);
    // (value, class totals) in ascending value order, zero group included.
    std::vector<std::pair<double, std::vector<double>>> levels;
    for (std::size_t begin = 0; begin < entries.size();) {
      const std::uint32_t feature = entries[begin].feature;
      std::size_t end = begin;
      while (end < entries.size() && entries[end].feature == feature) ++end;
      std::fill(nonzero.begin(), nonzero.end(), 0.0);
      levels.clear();
      for (std::size_t i = begin; i < end; ++i) {
        const double w = class_weight_[entries[i].target];
        nonzero[entries[i].target] += w;
        if (levels.empty() || levels.back().first != entries[i].value) {
          levels.emplace_back(entries[i].value, std::vector<double>(k_, 0.0));
        }
        levels.back().second[entries[i].target] += w;
      }
      if (end - begin < rows.size()) {
        std::vector<double> zeros(k_);
        for (std::size_t c = 0; c < k_; ++c) zeros[c] = totals[c] - nonzero[c];
        auto at = std::lower_bound(levels.begin(), levels.end(), 0.0,
                                   [](const auto& level, double v) { return level.first < v; });
        levels.insert(at, {0.0, std::move(zeros)});
      }
      std::fill(left.begin(), left.end(), 0.0);
      double left_weight = 0.0;
      for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        for (std::size_t c = 0; c < k_; ++c) {
          left[c] += levels[i].second[c];
          left_weight += levels[i].second[c];
        }
        std::vector<double> right(k_);
        for (std::size_t c = 0; c < k_; ++c) right[c] = totals[c] - left[c];
        const double right_weight = weight - left_weight;
        const double score = left_weight * Gini(left, left_weight) +
                             right_weight * Gini(right, right_weight);
        if (score < best.score - 1e-12 * weight) {
          best.score = score;
          best.feature = static_cast<std::int32_t>(feature);
          const double a = levels[i].first;
          const double b = levels[i + 1].first;
          double mid = a + (b - a) / 2.0;
          if (mid >= b) mid = a;
          best.threshold = mid;
        }
      }
      begin = end;
    }
    return best;
  }

  const ClassifierSpec& spec_;
  const SparseMatrix& x_;
  const Targets& t_;
  std::size_t k_;
  std::vector<double> class_weight_;
  std::vector<TreeNode> nodes_;
};

// ------------------------------------------------------------------ GNB

void FitGnb(const ClassifierSpec& spec, const SparseMatrix& x, const Targets& t,
            TrainedModel& model) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = t.classes.size();
  std::vector<double> counts(k, 0.0);
  std::vector<double> sums(k * d, 0.0);
  std::vector<double> squares(k * d, 0.0);
  std::vector<double> all_sum(d, 0.0);
  std::vector<double> all_square(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = t.index[r];
    counts[c] += 1.0;
    for (const Feature& f : x.Row(r)) {
      sums[c * d + f.index] += f.value;
      squares[c * d + f.index] += f.value * f.value;
      all_sum[f.index] += f.value;
      all_square[f.index] += f.value * f.value;
    }
  }
  double max_variance = 0.0;
  for (std::size_t f = 0; f < d; ++f) {
    const double mean = all_sum[f] / static_cast<double>(n);
    max_variance = std::max(max_variance, all_square[f] / static_cast<double>(n) - mean * mean);
  }
  double floor = spec.gnb_var_smoothing * max_variance;
  if (floor <= 0.0) floor = spec.gnb_var_smoothing;
  model.gnb_log_prior.resize(k);
  model.gnb_means.assign(k * d, 0.0);
  model.gnb_variances.assign(k * d, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    model.gnb_log_prior[c] = std::log(counts[c] / static_cast<double>(n));
    for (std::size_t f = 0; f < d; ++f) {
      const double mean = sums[c * d + f] / counts[c];
      const double variance = std::max(0.0, squares[c * d + f] / counts[c] - mean * mean);
      model.gnb_means[c * d + f] = mean;
      model.gnb_variances[c * d + f] = variance + floor;
    }
  }
}

std::vector<double> GnbScores(const TrainedModel& model, std::span<const Feature> row) {
  const std::size_t d = model.width;
  std::vector<double> scores(model.classes.size());
  for (std::size_t c = 0; c < scores.size(); ++c) {
    const double* mean = model.gnb_means.data() + c * d;
    const double* var = model.gnb_variances.data() + c * d;
    double s = model.gnb_log_prior[c];
    std::size_t next = 0;
    for (std::size_t f = 0; f < d; ++f) {
      double value = 0.0;
      if (next < row.size() && row[next].index == f) value = row[next++].value;
      const double diff = value - mean[f];
      s -= 0.5 * std::log(2.0 * kPi * var[f]) + diff * diff / (2.0 * var[f]);
    }
    scores[c] = s;
  }
  return scores;
}

// ----------------------------------------------------------- JSON helpers

nlohmann::json SparseToJson(const SparseMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (const Feature& f : m.Row(r)) row.push_back({f.index, f.value});
    rows.push_back(std::move(row));
  }
  return {{"cols", m.cols()}, {"rows", rows}};
}

SparseMatrix SparseFromJson(const nlohmann::json& j) {
  SparseMatrix m(j.at("cols").get<std::size_t>());
  std::vector<Feature> row;
  for (const auto& r : j.at("rows")) {
    row.clear();
    for (const auto& f : r) row.push_back({f.at(0).get<std::uint32_t>(), f.at(1).get<double>()});
    m.AddRow(row);
  }
  return m;
}

}  // namespace

std::string_view ClassifierKindName(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kRidge: return "RIDGE";
    case ClassifierKind::kSgdHinge: return "SGD_HINGE";
    case ClassifierKind::kMlp: return "MLP";
    case ClassifierKind::kKnn: return "KNN";
    case ClassifierKind::kTree: return "TREE";
    case ClassifierKind::kGnb: return "GNB";
  }
  return "?";
}

ClassifierKind ParseClassifierKind(std::string_view name) {
  for (ClassifierKind kind : {ClassifierKind::kRidge, ClassifierKind::kSgdHinge, ClassifierKind::kMlp,
                              ClassifierKind::kKnn, ClassifierKind::kTree, ClassifierKind::kGnb}) {
    if (ClassifierKindName(kind) == name) return kind;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown classifier kind: " + std::string(name));
}

void ClassifierSpec::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) Fail(ErrorCode::kInvalidArgument, what);
  };
  require(ridge_alpha > 0.0, "ridge alpha must be positive");
  require(sgd_alpha > 0.0 && sgd_eta0 > 0.0 && sgd_epochs >= 1, "bad SGD hyperparameters");
  require(!mlp_hidden.empty() &&
              std::all_of(mlp_hidden.begin(), mlp_hidden.end(), [](std::size_t s) { return s >= 1; }),
          "hidden layer sizes must be positive");
  require(mlp_epochs >= 1 && mlp_batch >= 1 && mlp_learning_rate > 0.0 && mlp_patience >= 1,
          "bad MLP hyperparameters");
  require(mlp_beta1 >= 0.0 && mlp_beta1 < 1.0 && mlp_beta2 >= 0.0 && mlp_beta2 < 1.0 &&
              mlp_epsilon > 0.0 && mlp_tolerance >= 0.0,
          "bad Adam hyperparameters");
  require(knn_k >= 1, "k must be at least 1");
  require(tree_max_depth >= 1, "tree depth must be at least 1");
  require(gnb_var_smoothing > 0.0, "variance smoothing must be positive");
}

bool TrainedModel::operator==(const TrainedModel& o) const {
  return kind == o.kind && classes == o.classes && width == o.width && seed == o.seed &&
         epochs_run == o.epochs_run && final_loss == o.final_loss && metadata == o.metadata &&
         linear_weights == o.linear_weights && mlp == o.mlp && knn_k == o.knn_k &&
         knn_rows == o.knn_rows && knn_targets == o.knn_targets && tree == o.tree &&
         gnb_log_prior == o.gnb_log_prior && gnb_means == o.gnb_means &&
         gnb_variances == o.gnb_variances;
}

std::size_t ArgMax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double Accuracy(std::span<const GroupLabel> truth, std::span<const GroupLabel> predicted) {
  if (truth.size() != predicted.size()) Fail(ErrorCode::kLengthMismatch, "label counts differ");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

TrainedModel Train(const ClassifierSpec& spec, const SparseMatrix& features,
                   std::span<const GroupLabel> labels) {
  spec.Validate();
  if (features.rows() != labels.size()) {
    Fail(ErrorCode::kLengthMismatch, "feature rows and labels differ in length");
  }
  if (features.rows() == 0 || features.cols() == 0) {
    Fail(ErrorCode::kDegenerateData, "training data has no rows or no features");
  }
  const Targets targets = IndexLabels(labels);
  if (targets.classes.size() < 2 && !spec.allow_single_class) {
    Fail(ErrorCode::kDegenerateData, "training data holds a single class");
  }
  TrainedModel model;
  model.kind = spec.kind;
  model.classes = targets.classes;
  model.width = features.cols();
  model.seed = spec.seed;
  switch (spec.kind) {
    case ClassifierKind::kRidge: FitRidge(spec, features, targets, model); break;
    case ClassifierKind::kSgdHinge: FitSgd(spec, features, targets, model); break;
    case ClassifierKind::kMlp: FitMlp(spec, features, targets, model); break;
    case ClassifierKind::kKnn:
      model.knn_k = spec.knn_k;
      model.knn_rows = features;
      model.knn_targets = targets.index;
      break;
    case ClassifierKind::kTree: model.tree = TreeBuilder(spec, features, targets).Build(); break;
    case ClassifierKind::kGnb: FitGnb(spec, features, targets, model); break;
  }
  return model;
}

TrainedModel Train(const ClassifierSpec& spec, const Dataset& dataset) {
  const std::vector<GroupLabel> labels = dataset.Labels();
  return Train(spec, dataset.Features(), labels);
}

std::vector<double> DecisionValues(const TrainedModel& model, std::span<const Feature> row) {
  const std::size_t k = model.classes.size();
  switch (model.kind) {
    case ClassifierKind::kRidge:
    case ClassifierKind::kSgdHinge: {
      std::vector<double> scores(k);
      for (std::size_t c = 0; c < k; ++c) {
        scores[c] = SparseDot(row, model.linear_weights.data() + c * model.width);
      }
      return scores;
    }
    case ClassifierKind::kMlp: return MlpForward(model.mlp, row);
    case ClassifierKind::kKnn: return KnnVotes(model, row);
    case ClassifierKind::kTree: {
      std::size_t node = 0;
      while (model.tree[node].feature >= 0) {
        const TreeNode& n = model.tree[node];
        node = static_cast<std::size_t>(
            FeatureValue(row, static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left
                                                                                     : n.right);
      }
      return model.tree[node].distribution;
    }
    case ClassifierKind::kGnb: return GnbScores(model, row);
  }
  return {};
}

std::vector<GroupLabel> Predict(const TrainedModel& model, const SparseMatrix& features,
                                std::size_t threads) {
  if (features.cols() != model.width) {
    Fail(ErrorCode::kWidthMismatch, "feature width " + std::to_string(features.cols()) +
                                        " differs from model width " + std::to_string(model.width));
  }
  std::vector<GroupLabel> out(features.rows());
  ParallelFor(features.rows(), threads, [&](std::size_t r) {
    const std::vector<double> scores = DecisionValues(model, features.Row(r));
    out[r] = model.classes[ArgMax(scores)];
  });
  return out;
}

std::string ModelToJson(const TrainedModel& model) {
  nlohmann::json j;
  j["kind"] = ClassifierKindName(model.kind);
  std::string classes;
  for (const GroupLabel& c : model.classes) classes += c.letter();
  j["classes"] = classes;
  j["width"] = model.width;
  j["seed"] = model.seed;
  j["epochs_run"] = model.epochs_run;
  j["final_loss"] = model.final_loss;
  j["metadata"] = model.metadata;
  switch (model.kind) {
    case ClassifierKind::kRidge:
    case ClassifierKind::kSgdHinge: j["weights"] = model.linear_weights; break;
    case ClassifierKind::kMlp:
      j["sizes"] = model.mlp.sizes();
      j["params"] = model.mlp.values();
      break;
    case ClassifierKind::kKnn:
      j["k"] = model.knn_k;
      j["rows"] = SparseToJson(model.knn_rows);
      j["targets"] = model.knn_targets;
      break;
    case ClassifierKind::kTree: {
      nlohmann::json nodes = nlohmann::json::array();
      for (const TreeNode& n : model.tree) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"depth", n.depth},
                         {"distribution", n.distribution},
                         {"prediction", n.prediction}});
      }
      j["nodes"] = nodes;
      break;
    }
    case ClassifierKind::kGnb:
      j["log_prior"] = model.gnb_log_prior;
      j["means"] = model.gnb_means;
      j["variances"] = model.gnb_variances;
      break;
  }
  return j.dump();
}

TrainedModel ModelFromJson(std::string_view text) {
  TrainedModel model;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    model.kind = ParseClassifierKind(j.at("kind").get<std::string>());
    for (char c : j.at("classes").get<std::string>()) {
      model.classes.push_back(GroupLabel::FromLetter(c));
    }
    model.width = j.at("width").get<std::size_t>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.epochs_run = j.at("epochs_run").get<int>();
    model.final_loss = j.at("final_loss").get<double>();
    model.metadata = j.at("metadata").get<Metadata>();
    const std::size_t k = model.classes.size();
    auto require = [](bool ok, const char* what) {
      if (!ok) Fail(ErrorCode::kMalformedLine, std::string("model: ") + what);
    };
    require(k >= 1 && std::is_sorted(model.classes.begin(), model.classes.end()), "classes");
    switch (model.kind) {
      case ClassifierKind::kRidge:
      case ClassifierKind::kSgdHinge:
        model.linear_weights = j.at("weights").get<std::vector<double>>();
        require(model.linear_weights.size() == k * model.width, "weight shape");
        break;
      case ClassifierKind::kMlp: {
        model.mlp = MlpParams(j.at("sizes").get<std::vector<std::size_t>>());
        std::vector<double> params = j.at("params").get<std::vector<double>>();
        require(params.size() == model.mlp.values().size() &&
                    model.mlp.input_size() == model.width && model.mlp.output_size() == k,
                "MLP shape");
        model.mlp.values() = std::move(params);
        break;
      }
      case ClassifierKind::kKnn:
        model.knn_k = j.at("k").get<std::size_t>();
        model.knn_rows = SparseFromJson(j.at("rows"));
        model.knn_targets = j.at("targets").get<std::vector<std::uint32_t>>();
        require(model.knn_rows.cols() == model.width &&
                    model.knn_targets.size() == model.knn_rows.rows() && model.knn_rows.rows() > 0,
                "KNN shape");
        for (std::uint32_t t : model.knn_targets) require(t < k, "KNN target");
        break;
      case ClassifierKind::kTree:
        for (const auto& n : j.at("nodes")) {
          TreeNode node;
          node.feature = n.at("feature").get<std::int32_t>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<std::int32_t>();
          node.right = n.at("right").get<std::int32_t>();
          node.depth = n.at("depth").get<std::uint32_t>();
          node.distribution = n.at("distribution").get<std::vector<double>>();
          node.prediction = n.at("prediction").get<std::uint32_t>();
          model.tree.push_back(std::move(node));
        }
        require(!model.tree.empty(), "empty tree");
        for (std::size_t i = 0; i < model.tree.size(); ++i) {
          const TreeNode& n = model.tree[i];
          require(n.distribution.size() == k, "tree distribution");
          if (n.feature >= 0) {
            require(static_cast<std::size_t>(n.feature) < model.width, "tree feature");
            // Children always follow their parent, which rules out cycles.
            require(n.left > static_cast<std::int32_t>(i) && n.right > static_cast<std::int32_t>(i) &&
                        static_cast<std::size_t>(n.left) < model.tree.size() &&
                        static_cast<std::size_t>(n.right) < model.tree.size(),
                    "tree links");
          }
        }
        break;
      case ClassifierKind::kGnb:
        model.gnb_log_prior = j.at("log_prior").get<std::vector<double>>();
        model.gnb_means = j.at("means").get<std::vector<double>>();
        model.gnb_variances = j.at("variances").get<std::vector<double>>();
        require(model.gnb_log_prior.size() == k && model.gnb_means.size() == k * model.width &&
                    model.gnb_variances.size() == k * model.width,
                "GNB shape");
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformedLine, std::string("model: ") + e.what());
  }
  return model;
}

std::string SerializeModel(const TrainedModel& model) {
  return WrapChecksummed(kModelMagic, 1, ModelToJson(model) + "\n");
}

TrainedModel ParseModel(std::string_view file) {
  return ModelFromJson(UnwrapChecksummed(kModelMagic, 1, file));
}

}  // namespace affinity
