/*
 * Copyright 2026 The bcx Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"
#include "bcx/random.hpp"
#include "bcx/tree.hpp"

namespace bcx {

struct ForestParams {
  std::size_t n_trees = 500;
  /// Candidate features per split; 0 means floor(sqrt(d)).
  std::size_t mtry = 0;
  /// Off only in tests, where a 1-tree forest must equal a plain tree.
  bool bootstrap = true;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<DecisionTreeModel> trees;
  std::size_t n_features = 0;
  std::size_t mtry = 0;
  ForestParams params;
};

inline std::size_t default_mtry(std::size_t n_features) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(
                                      static_cast<double>(n_features)))));
}

/// Each tree t uses its own stream derive_seed(seed, t), for both the
/// bootstrap draw and per-split feature sampling, so trees can be grown in
/// any order.
inline ForestModel train_random_forest(const Matrix& x, std::span<const Label> y,
                                       const ForestParams& params = {}) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    fail(ErrorKind::kShape, "X has " + std::to_string(x.rows()) + " rows but y has " +
                                std::to_string(y.size()) + " labels");
  }
  if (y.size() < 2) fail(ErrorKind::kDegenerateLabel, "random forest needs at least 2 samples");
  std::size_t malignant = 0;
  for (const auto label : y) malignant += (label == Label::kMalignant);
  if (malignant == 0 || malignant == y.size()) {
    fail(ErrorKind::kDegenerateLabel, "training labels contain a single class");
  }
  if (params.n_trees == 0) fail(ErrorKind::kConfig, "n_trees must be positive");

  ForestModel forest;
  forest.n_features = static_cast<std::size_t>(x.cols());
  forest.mtry = params.mtry == 0 ? default_mtry(forest.n_features)
                                 : std::min(params.mtry, forest.n_features);
  forest.params = params;
  forest.trees.reserve(params.n_trees);

  const std::size_t n = y.size();
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(params.seed, t);
    Rng rng(tree_seed);
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = rng.below(n);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeParams tree_params;
    tree_params.min_samples_split = params.min_samples_split;
    tree_params.max_features = forest.mtry;
    tree_params.seed = tree_seed;
    forest.trees.push_back(train_decision_tree(x, y, std::move(rows), tree_params, rng));
  }
  return forest;
}

/// Number of trees whose hard label is malignant.
template <typename Row>
std::size_t forest_malignant_votes(const ForestModel& forest, const Row& row) {
  std::size_t votes = 0;
  for (const auto& tree : forest.trees) {
    votes += label_from_probability(tree.nodes[tree_leaf(tree, row)].malignant_fraction()) ==
             Label::kMalignant;
  }
  return votes;
}

inline double forest_predict_proba(const ForestModel& forest, std::span<const double> row) {
  if (row.size() != forest.n_features) {
    fail(ErrorKind::kShape, "forest expects " + std::to_string(forest.n_features) +
                                " features, got " + std::to_string(row.size()));
  }
  for (const double v : row) {
    if (!std::isfinite(v)) fail(ErrorKind::kValue, "non-finite input to forest prediction");
  }
  return static_cast<double>(forest_malignant_votes(forest, row)) /
         static_cast<double>(forest.trees.size());
}

inline Vector forest_predict_proba(const ForestModel& forest, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != forest.n_features) {
    fail(ErrorKind::kShape, "forest expects " + std::to_string(forest.n_features) +
                                " features, got " + std::to_string(x.cols()));
  }
  if (!x.allFinite()) fail(ErrorKind::kValue, "non-finite input to forest prediction");
  Vector out(x.rows());
  const double n_trees = static_cast<double>(forest.trees.size());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out[r] = static_cast<double>(forest_malignant_votes(forest, x.row(r))) / n_trees;
  }
  return out;
}

/// Mean of the per-tree normalized impurity importances.
inline std::vector<double> forest_importances(const ForestModel& forest) {
  std::vector<double> out(forest.n_features, 0.0);
  for (const auto& tree : forest.trees) {
    const auto imp = tree_importances(tree);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += imp[j];
  }
  for (auto& v : out) v /= static_cast<double>(forest.trees.size());
  return out;
}

}  // namespace bcx
