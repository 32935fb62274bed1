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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"
#include "bcx/model.hpp"

namespace bcx {

/// Positive class is malignant.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t n() const { return tp + fp + tn + fn; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion_matrix(std::span<const Label> predicted,
                                        std::span<const Label> truth) {
  if (predicted.size() != truth.size()) {
    fail(ErrorKind::kShape, std::to_string(predicted.size()) + " predictions for " +
                                std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) fail(ErrorKind::kShape, "confusion matrix of zero samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pred_pos = predicted[i] == Label::kMalignant;
    const bool true_pos = truth[i] == Label::kMalignant;
    if (pred_pos && true_pos) ++cm.tp;
    else if (pred_pos) ++cm.fp;
    else if (true_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

struct ClassificationMetrics {
  double acc = 0.0;
  double se = 0.0;
  double sp = 0.0;
};

inline ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  if (cm.n() == 0) fail(ErrorKind::kUndefinedMetric, "no samples");
  if (cm.tp + cm.fn == 0) fail(ErrorKind::kUndefinedMetric, "sensitivity without positives");
  if (cm.tn + cm.fp == 0) fail(ErrorKind::kUndefinedMetric, "specificity without negatives");
  return {static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.n()),
          static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn),
          static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp)};
}

/// Mann-Whitney AUC: probability that a random malignant sample scores above
/// a random benign one, ties counted as one half. Computed from midranks.
inline double roc_auc(std::span<const double> scores, std::span<const Label> truth) {
  if (scores.size() != truth.size()) {
    fail(ErrorKind::kShape, std::to_string(scores.size()) + " scores for " +
                                std::to_string(truth.size()) + " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;  // twice the positive midrank sum, kept integral
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // ranks i+1 .. j share midrank (i+1+j)/2
    for (std::size_t t = i; t < j; ++t) {
      if (truth[order[t]] == Label::kMalignant) {
        rank_sum += static_cast<double>(i + 1 + j);
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(ErrorKind::kUndefinedMetric, "AUC needs both classes");
  const double u = rank_sum / 2.0 - static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double roc_auc(const Vector& scores, std::span<const Label> truth) {
  return roc_auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                 truth);
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// ROC curve with one point per distinct score (descending), starting at (0, 0).
inline std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                       std::span<const Label> truth) {
  if (scores.size() != truth.size()) fail(ErrorKind::kShape, "scores/labels length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t n_pos = 0;
  for (const auto l : truth) n_pos += (l == Label::kMalignant);
  const std::size_t n_neg = truth.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(ErrorKind::kUndefinedMetric, "ROC needs both classes");
  std::vector<RocPoint> curve{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (truth[order[i]] == Label::kMalignant ? tp : fp) += 1;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                     static_cast<double>(tp) / static_cast<double>(n_pos), s});
  }
  return curve;
}

inline double trapezoidal_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

/// Coefficient of determination of `approx` against `target`.
inline double r_squared(std::span<const double> approx, std::span<const double> target) {
  if (approx.size() != target.size()) fail(ErrorKind::kShape, "r_squared length mismatch");
  if (target.size() < 2) fail(ErrorKind::kUndefinedMetric, "r_squared needs at least 2 values");
  const double mean =
      std::accumulate(target.begin(), target.end(), 0.0) / static_cast<double>(target.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    ss_res += (approx[i] - target[i]) * (approx[i] - target[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  if (!(ss_tot > 0.0)) fail(ErrorKind::kUndefinedMetric, "target has zero variance");
  return 1.0 - ss_res / ss_tot;
}

inline double r_squared(const Vector& approx, const Vector& target) {
  return r_squared(std::span<const double>(approx.data(), static_cast<std::size_t>(approx.size())),
                   std::span<const double>(target.data(), static_cast<std::size_t>(target.size())));
}

// ---------------------------------------------------------------------------

struct FoldMetrics {
  std::size_t fold = 0;
  ConfusionMatrix cm;
  double acc = 0.0;
  double se = std::numeric_limits<double>::quiet_NaN();
  double sp = std::numeric_limits<double>::quiet_NaN();
  double auc = std::numeric_limits<double>::quiet_NaN();
};

struct MetricsReport {
  double acc = 0.0;
  double se = 0.0;
  double sp = 0.0;
  /// AUC of the hard labels, i.e. (se + sp) / 2. Used in the tables.
  double auc = 0.0;
  /// AUC of the continuous model scores.
  double auc_score = 0.0;
  std::size_t n = 0;
  ConfusionMatrix cm;
  std::vector<FoldMetrics> per_fold;
};

/// Metrics of one set of predictions. `scores` are probabilities, `predicted`
/// the model's hard labels.
inline MetricsReport evaluate_predictions(std::span<const double> scores,
                                          std::span<const Label> predicted,
                                          std::span<const Label> truth) {
  MetricsReport report;
  report.cm = confusion_matrix(predicted, truth);
  report.n = report.cm.n();
  const auto m = classification_metrics(report.cm);
  report.acc = m.acc;
  report.se = m.se;
  report.sp = m.sp;
  std::vector<double> label_scores(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) label_scores[i] = to_target(predicted[i]);
  report.auc = roc_auc(label_scores, truth);
  report.auc_score = roc_auc(scores, truth);
  return report;
}

/// k-fold cross validation with pooled out-of-fold predictions.
/// `fit(train, fold)` returns a ProbabilisticModel trained on `train`.
template <typename Fit>
MetricsReport cross_validate_with(const Dataset& dataset, const FoldAssignment& folds, Fit&& fit) {
  const std::size_t n = dataset.n_samples();
  std::vector<double> pooled_scores(n, 0.0);
  std::vector<Label> pooled_labels(n, Label::kBenign);
  std::vector<FoldMetrics> per_fold;
  for (std::size_t f = 0; f < folds.k; ++f) {
    const auto train_rows = folds.train_indices(f);
    const auto test_rows = folds.test_indices(f);
    const Dataset train = subset_rows(dataset, train_rows);
    const Dataset test = subset_rows(dataset, test_rows);
    try {
      const auto model = fit(train, f);
      const Vector scores = model.predict_proba(test.features);
      const auto labels = hard_labels(model, test.features);
      FoldMetrics fm;
      fm.fold = f;
      fm.cm = confusion_matrix(labels, test.labels);
      fm.acc = static_cast<double>(fm.cm.tp + fm.cm.tn) / static_cast<double>(fm.cm.n());
      if (fm.cm.tp + fm.cm.fn > 0) fm.se = static_cast<double>(fm.cm.tp) / static_cast<double>(fm.cm.tp + fm.cm.fn);
      if (fm.cm.tn + fm.cm.fp > 0) fm.sp = static_cast<double>(fm.cm.tn) / static_cast<double>(fm.cm.tn + fm.cm.fp);
      if (fm.cm.tp + fm.cm.fn > 0 && fm.cm.tn + fm.cm.fp > 0) fm.auc = roc_auc(scores, test.labels);
      per_fold.push_back(fm);
      for (std::size_t i = 0; i < test_rows.size(); ++i) {
        pooled_scores[test_rows[i]] = scores[static_cast<Eigen::Index>(i)];
        pooled_labels[test_rows[i]] = labels[i];
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what());
    }
  }
  MetricsReport report = evaluate_predictions(pooled_scores, pooled_labels, dataset.labels);
  report.per_fold = std::move(per_fold);
  return report;
}

/// Fold seed is `seed`; the model for fold f is trained with
/// derive_seed(seed, 0x4D4F44454C, f).
inline MetricsReport cross_validate(const ModelSpec& spec, const Dataset& dataset, std::size_t k,
                                    std::uint64_t seed) {
  const auto folds = stratified_folds(dataset, k, seed);
  return cross_validate_with(dataset, folds, [&](const Dataset& train, std::size_t fold) {
    return train_model(spec, train, derive_seed(seed, 0x4D4F44454CULL, fold));
  });
}

}  // namespace bcx
