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

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"
#include "bcx/metrics.hpp"
#include "bcx/model.hpp"
#include "bcx/tree.hpp"

namespace bcx {

struct SurrogateReport {
  DecisionTreeModel surrogate;
  /// Fidelity: R^2 of surrogate probabilities against black-box probabilities.
  double r2 = 0.0;
  /// Surrogate scored against the true labels.
  MetricsReport surrogate_vs_truth;
  /// Fraction of rows where surrogate and black-box hard labels agree.
  double agreement = 0.0;
  std::vector<double> importances;
  std::string bbm;
  /// Black-box outputs the surrogate was fitted to, per row.
  Vector bbm_probabilities;
  std::vector<Label> bbm_labels;
};

/// Distils `model` into a fully grown Gini tree. The tree is fitted to the
/// black box's hard labels on every row of `fit_on` and evaluated on the rows
/// of `evaluate_on` (which may be the same data).
template <ProbabilisticModel M>
SurrogateReport fit_global_surrogate(const M& model, const Dataset& fit_on,
                                     const Dataset& evaluate_on, std::string bbm_tag = "bbm",
                                     const TreeParams& params = {}) {
  const auto fit_labels = hard_labels(model, fit_on.features);
  std::size_t malignant = 0;
  for (const auto l : fit_labels) malignant += (l == Label::kMalignant);
  if (malignant == 0 || malignant == fit_labels.size()) {
    fail(ErrorKind::kDegenerateTarget, "black box predicts a single class on every row");
  }
  SurrogateReport out;
  out.bbm = std::move(bbm_tag);
  out.surrogate = train_decision_tree(fit_on.features, fit_labels, params);
  out.importances = tree_importances(out.surrogate);

  out.bbm_probabilities = model.predict_proba(evaluate_on.features);
  out.bbm_labels = hard_labels(model, evaluate_on.features);
  const Vector surrogate_proba = tree_predict_proba(out.surrogate, evaluate_on.features);
  std::vector<Label> surrogate_labels(static_cast<std::size_t>(surrogate_proba.size()));
  std::size_t agree = 0;
  for (std::size_t i = 0; i < surrogate_labels.size(); ++i) {
    surrogate_labels[i] = label_from_probability(surrogate_proba[static_cast<Eigen::Index>(i)]);
    agree += surrogate_labels[i] == out.bbm_labels[i];
  }
  out.agreement = static_cast<double>(agree) / static_cast<double>(surrogate_labels.size());
  out.r2 = r_squared(surrogate_proba, out.bbm_probabilities);
  out.surrogate_vs_truth = evaluate_predictions(
      std::span<const double>(surrogate_proba.data(), static_cast<std::size_t>(surrogate_proba.size())),
      surrogate_labels, evaluate_on.labels);
  return out;
}

template <ProbabilisticModel M>
SurrogateReport fit_global_surrogate(const M& model, const Dataset& dataset,
                                     std::string bbm_tag = "bbm", const TreeParams& params = {}) {
  return fit_global_surrogate(model, dataset, dataset, std::move(bbm_tag), params);
}

/// Out-of-fold surrogate fidelity. For each fold the black box is trained on
/// the training split exactly as in cross_validate (same folds and seeds), a
/// surrogate is distilled from its labels on those rows, and both are scored
/// on the held-out rows. Pooled over folds.
struct SurrogateCvReport {
  MetricsReport surrogate_vs_truth;
  double r2 = 0.0;
  double agreement = 0.0;
  Vector surrogate_probabilities;
  Vector bbm_probabilities;
};

inline SurrogateCvReport cross_validated_surrogate(const ModelSpec& spec, const Dataset& dataset,
                                                   std::size_t k, std::uint64_t seed,
                                                   const TreeParams& params = {}) {
  const auto folds = stratified_folds(dataset, k, seed);
  const auto n = static_cast<Eigen::Index>(dataset.n_samples());
  SurrogateCvReport out;
  out.surrogate_probabilities = Vector::Zero(n);
  out.bbm_probabilities = Vector::Zero(n);
  std::vector<Label> surrogate_labels(dataset.n_samples(), Label::kBenign);
  std::size_t agree = 0;
  for (std::size_t f = 0; f < folds.k; ++f) {
    const auto test_rows = folds.test_indices(f);
    const Dataset train = subset_rows(dataset, folds.train_indices(f));
    const Dataset test = subset_rows(dataset, test_rows);
    try {
      const auto model = train_model(spec, train, derive_seed(seed, 0x4D4F44454CULL, f));
      const auto fold = fit_global_surrogate(model, train, test, std::string(to_string(spec.kind)),
                                             params);
      const Vector proba = tree_predict_proba(fold.surrogate, test.features);
      for (std::size_t i = 0; i < test_rows.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(test_rows[i]);
        out.surrogate_probabilities[row] = proba[static_cast<Eigen::Index>(i)];
        out.bbm_probabilities[row] = fold.bbm_probabilities[static_cast<Eigen::Index>(i)];
        surrogate_labels[test_rows[i]] = label_from_probability(proba[static_cast<Eigen::Index>(i)]);
        agree += surrogate_labels[test_rows[i]] == fold.bbm_labels[i];
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what());
    }
  }
  out.r2 = r_squared(out.surrogate_probabilities, out.bbm_probabilities);
  out.agreement = static_cast<double>(agree) / static_cast<double>(dataset.n_samples());
  out.surrogate_vs_truth = evaluate_predictions(
      std::span<const double>(out.surrogate_probabilities.data(), dataset.n_samples()),
      surrogate_labels, dataset.labels);
  return out;
}

}  // namespace bcx
