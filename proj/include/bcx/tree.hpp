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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"
#include "bcx/random.hpp"

namespace bcx {

/// Class counts at a node: (benign, malignant).
using ClassCounts = std::array<std::uint32_t, 2>;

/// Gini impurity 1 - sum p_c^2 of a binary node.
inline double gini_impurity(std::uint64_t n_benign, std::uint64_t n_malignant) {
  const std::uint64_t total = n_benign + n_malignant;
  if (total == 0) fail(ErrorKind::kEmptyNode, "gini impurity of an empty node");
  const double pb = static_cast<double>(n_benign) / static_cast<double>(total);
  const double pm = static_cast<double>(n_malignant) / static_cast<double>(total);
  return 1.0 - (pb * pb + pm * pm);
}

inline double gini_impurity(const ClassCounts& counts) {
  return gini_impurity(counts[0], counts[1]);
}

struct TreeNode {
  /// -1 for leaves.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double impurity = 0.0;
  ClassCounts counts{0, 0};

  bool is_leaf() const { return feature < 0; }

  /// Malignant fraction of the training samples that reached this node.
  double malignant_fraction() const {
    return static_cast<double>(counts[1]) / static_cast<double>(counts[0] + counts[1]);
  }
};

struct TreeParams {
  std::size_t min_samples_split = 2;
  /// 0 means unlimited.
  std::size_t max_depth = 0;
  /// Candidate features drawn per split; 0 means all features.
  std::size_t max_features = 0;
  std::uint64_t seed = 0;
};

struct DecisionTreeModel {
  /// Node 0 is the root; children always follow their parent.
  std::vector<TreeNode> nodes;
  std::size_t n_features = 0;
  TreeParams params;

  const TreeNode& root() const { return nodes.front(); }

  std::size_t depth() const {
    std::vector<std::size_t> depth_of(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      deepest = std::max(deepest, depth_of[i]);
      if (!nodes[i].is_leaf()) {
        depth_of[static_cast<std::size_t>(nodes[i].left)] = depth_of[i] + 1;
        depth_of[static_cast<std::size_t>(nodes[i].right)] = depth_of[i] + 1;
      }
    }
    return deepest;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  /// Parent impurity minus the size-weighted impurity of the two children.
  double impurity_decrease = 0.0;
};

namespace detail {

/// Exact split score sum_side sum_c c^2 / n_side, kept as a fraction so that
/// equal-gain candidates compare equal regardless of rounding.
struct SplitScore {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  static SplitScore of(const ClassCounts& left, const ClassCounts& right) {
    const std::uint64_t nl = std::uint64_t{left[0]} + left[1];
    const std::uint64_t nr = std::uint64_t{right[0]} + right[1];
    const std::uint64_t sl = std::uint64_t{left[0]} * left[0] + std::uint64_t{left[1]} * left[1];
    const std::uint64_t sr =
        std::uint64_t{right[0]} * right[0] + std::uint64_t{right[1]} * right[1];
    return {sl * nr + sr * nl, nl * nr};
  }

  bool operator>(const SplitScore& other) const {
    return static_cast<unsigned __int128>(numerator) * other.denominator >
           static_cast<unsigned __int128>(other.numerator) * denominator;
  }

  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
};

inline double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Adjacent doubles: keep "value <= threshold" sending lo left and hi right.
  return (mid >= hi) ? lo : mid;
}

inline ClassCounts count_classes(std::span<const Label> y, std::span<const std::size_t> rows) {
  ClassCounts counts{0, 0};
  for (const auto r : rows) ++counts[static_cast<std::size_t>(y[r])];
  return counts;
}

}  // namespace detail

/// Best Gini split of `rows` over `candidate_features`. Candidates are scanned
/// in the given order and thresholds in increasing order; only a strictly
/// better score replaces the incumbent, so ties go to the earliest candidate.
/// Returns nullopt when no threshold strictly decreases impurity.
inline std::optional<Split> best_split(const Matrix& x, std::span<const Label> y,
                                       std::span<const std::size_t> rows,
                                       std::span<const std::size_t> candidate_features) {
  if (rows.empty()) fail(ErrorKind::kEmptyNode, "best_split on an empty row set");
  const ClassCounts parent = detail::count_classes(y, rows);
  if (parent[0] == 0 || parent[1] == 0) return std::nullopt;
  const std::uint64_t n = rows.size();
  // Parent score: sum_c c^2 / n; a split must beat it strictly.
  const detail::SplitScore parent_score{
      std::uint64_t{parent[0]} * parent[0] + std::uint64_t{parent[1]} * parent[1], n};

  std::optional<Split> best;
  detail::SplitScore best_score = parent_score;
  std::vector<std::pair<double, Label>> column(rows.size());
  for (const auto f : candidate_features) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = {x(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(f)),
                   y[rows[i]]};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    ClassCounts left{0, 0};
    ClassCounts right = parent;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      const auto cls = static_cast<std::size_t>(column[i].second);
      ++left[cls];
      --right[cls];
      if (!(column[i].first < column[i + 1].first)) continue;
      const auto score = detail::SplitScore::of(left, right);
      if (score > best_score) {
        best_score = score;
        best = Split{f, detail::midpoint(column[i].first, column[i + 1].first), 0.0};
      }
    }
  }
  if (best) {
    // decrease = gini(parent) - (1 - score / n)
    best->impurity_decrease =
        gini_impurity(parent) - (1.0 - best_score.value() / static_cast<double>(n));
  }
  return best;
}

/// Grows a CART tree on `rows` of (x, y). Rows may repeat (bootstrap draws).
inline DecisionTreeModel train_decision_tree(const Matrix& x, std::span<const Label> y,
                                             std::vector<std::size_t> rows,
                                             const TreeParams& params, Rng& rng) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    fail(ErrorKind::kShape, "X has " + std::to_string(x.rows()) + " rows but y has " +
                                std::to_string(y.size()) + " labels");
  }
  if (rows.empty()) fail(ErrorKind::kShape, "cannot train a tree on zero samples");
  DecisionTreeModel tree;
  tree.n_features = static_cast<std::size_t>(x.cols());
  tree.params = params;
  const std::size_t d = tree.n_features;
  const std::size_t mtry = (params.max_features == 0) ? d : std::min(params.max_features, d);

  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});
  std::vector<std::size_t> candidates;

  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, std::move(rows), 0});

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    TreeNode& node = tree.nodes[job.node];
    node.counts = detail::count_classes(y, job.rows);
    node.impurity = gini_impurity(node.counts);

    const bool can_split = job.rows.size() >= params.min_samples_split && node.impurity > 0.0 &&
                           (params.max_depth == 0 || job.depth < params.max_depth);
    if (!can_split) continue;

    if (mtry == d) {
      candidates = all_features;
    } else {
      // Partial Fisher-Yates draw of mtry distinct features.
      std::vector<std::size_t> pool = all_features;
      for (std::size_t i = 0; i < mtry; ++i) {
        std::swap(pool[i], pool[i + rng.below(d - i)]);
      }
      candidates.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(mtry));
      std::sort(candidates.begin(), candidates.end());
    }

    const auto split = best_split(x, y, job.rows, candidates);
    if (!split) continue;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (const auto r : job.rows) {
      if (x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(split->feature)) <=
          split->threshold) {
        left_rows.push_back(r);
      } else {
        right_rows.push_back(r);
      }
    }
    const auto left_index = static_cast<std::int32_t>(tree.nodes.size());
    node.feature = static_cast<std::int32_t>(split->feature);
    node.threshold = split->threshold;
    node.left = left_index;
    node.right = left_index + 1;
    tree.nodes.push_back({});  // invalidates `node`
    tree.nodes.push_back({});
    // Right first so the left subtree is expanded first.
    stack.push_back({static_cast<std::size_t>(left_index) + 1, std::move(right_rows), job.depth + 1});
    stack.push_back({static_cast<std::size_t>(left_index), std::move(left_rows), job.depth + 1});
  }
  return tree;
}

inline DecisionTreeModel train_decision_tree(const Matrix& x, std::span<const Label> y,
                                             const TreeParams& params = {}) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    fail(ErrorKind::kShape, "X has " + std::to_string(x.rows()) + " rows but y has " +
                                std::to_string(y.size()) + " labels");
  }
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(params.seed);
  return train_decision_tree(x, y, std::move(rows), params, rng);
}

/// Index of the leaf reached by `row` ("go left iff value <= threshold").
template <typename Row>
std::size_t tree_leaf(const DecisionTreeModel& tree, const Row& row) {
  std::size_t i = 0;
  while (!tree.nodes[i].is_leaf()) {
    const auto& node = tree.nodes[i];
    i = static_cast<std::size_t>(row[node.feature] <= node.threshold ? node.left : node.right);
  }
  return i;
}

inline double tree_predict_proba(const DecisionTreeModel& tree, std::span<const double> row) {
  if (row.size() != tree.n_features) {
    fail(ErrorKind::kShape, "tree expects " + std::to_string(tree.n_features) +
                                " features, got " + std::to_string(row.size()));
  }
  for (const double v : row) {
    if (!std::isfinite(v)) fail(ErrorKind::kValue, "non-finite input to tree prediction");
  }
  return tree.nodes[tree_leaf(tree, row)].malignant_fraction();
}

inline Vector tree_predict_proba(const DecisionTreeModel& tree, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != tree.n_features) {
    fail(ErrorKind::kShape, "tree expects " + std::to_string(tree.n_features) +
                                " features, got " + std::to_string(x.cols()));
  }
  if (!x.allFinite()) fail(ErrorKind::kValue, "non-finite input to tree prediction");
  Vector out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out[r] = tree.nodes[tree_leaf(tree, x.row(r))].malignant_fraction();
  }
  return out;
}

/// Impurity-based importances: sum over internal nodes of
/// (node sample fraction x impurity decrease), normalized to sum 1. All zero
/// for a single-leaf tree.
inline std::vector<double> tree_importances(const DecisionTreeModel& tree) {
  std::vector<double> importance(tree.n_features, 0.0);
  const auto& root = tree.root();
  const double n_root = static_cast<double>(root.counts[0] + root.counts[1]);
  for (const auto& node : tree.nodes) {
    if (node.is_leaf()) continue;
    const auto& l = tree.nodes[static_cast<std::size_t>(node.left)];
    const auto& r = tree.nodes[static_cast<std::size_t>(node.right)];
    const double n = static_cast<double>(node.counts[0] + node.counts[1]);
    const double nl = static_cast<double>(l.counts[0] + l.counts[1]);
    const double nr = static_cast<double>(r.counts[0] + r.counts[1]);
    const double decrease = node.impurity - (nl * l.impurity + nr * r.impurity) / n;
    importance[static_cast<std::size_t>(node.feature)] += (n / n_root) * decrease;
  }
  const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : importance) v /= total;
  }
  return importance;
}

}  // namespace bcx
