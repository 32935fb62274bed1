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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"
#include "bcx/metrics.hpp"
#include "bcx/model.hpp"
#include "bcx/random.hpp"
#include "bcx/shapley.hpp"
#include "bcx/surrogate.hpp"

namespace bcx {

enum class ImportanceMethod { kGlobalSurrogate, kShapley };

inline std::string_view to_string(ImportanceMethod m) {
  return m == ImportanceMethod::kGlobalSurrogate ? "global_surrogate" : "shapley";
}

inline std::optional<ImportanceMethod> parse_importance_method(std::string_view name) {
  if (name == "gs" || name == "global_surrogate") return ImportanceMethod::kGlobalSurrogate;
  if (name == "sv" || name == "shapley") return ImportanceMethod::kShapley;
  return std::nullopt;
}

struct ImportanceAggregate {
  ImportanceMethod method = ImportanceMethod::kGlobalSurrogate;
  std::size_t repetitions = 0;
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<std::size_t> ranking;
  /// repetitions x n_features, one normalized vector per repetition.
  std::vector<std::vector<double>> per_repetition;
};

inline void normalize_in_place(std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (total > 0.0) {
    for (auto& x : v) x /= total;
  }
}

/// Aggregates per-repetition vectors. Accumulation runs in repetition-index
/// order, so the result does not depend on the order the vectors were
/// produced in.
inline ImportanceAggregate aggregate_importances(ImportanceMethod method,
                                                 std::vector<std::vector<double>> per_rep) {
  if (per_rep.empty()) fail(ErrorKind::kConfig, "repetitions must be at least 1");
  const std::size_t d = per_rep.front().size();
  ImportanceAggregate out;
  out.method = method;
  out.repetitions = per_rep.size();
  out.mean.assign(d, 0.0);
  out.std.assign(d, 0.0);
  const double r = static_cast<double>(per_rep.size());
  for (auto& v : per_rep) {
    if (v.size() != d) fail(ErrorKind::kShape, "importance vectors differ in length");
    normalize_in_place(v);
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += v[j];
  }
  for (auto& m : out.mean) m /= r;
  for (const auto& v : per_rep) {
    for (std::size_t j = 0; j < d; ++j) out.std[j] += (v[j] - out.mean[j]) * (v[j] - out.mean[j]);
  }
  for (auto& s : out.std) s = std::sqrt(s / r);
  out.ranking = rank_descending(out.mean);
  out.per_repetition = std::move(per_rep);
  return out;
}

/// Repetition r calls importance(r, derive_seed(master_seed, r)).
template <typename ImportanceFn>
ImportanceAggregate repeated_importance_with(ImportanceMethod method, std::size_t repetitions,
                                             std::uint64_t master_seed, ImportanceFn&& importance) {
  if (repetitions == 0) fail(ErrorKind::kConfig, "repetitions must be at least 1");
  std::vector<std::vector<double>> per_rep(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) {
    try {
      per_rep[r] = importance(r, derive_seed(master_seed, r));
    } catch (const Error& e) {
      throw Error(e.kind(), "repetition " + std::to_string(r) + ": " + e.what());
    }
  }
  return aggregate_importances(method, std::move(per_rep));
}

/// Retrains the black box on the full dataset for every repetition and
/// explains it: surrogate-tree importances, or mean |Shapley value| per
/// feature over all samples.
inline ImportanceAggregate repeated_importance(ImportanceMethod method, const ModelSpec& spec,
                                               const Dataset& dataset, std::size_t repetitions,
                                               std::uint64_t master_seed,
                                               ShapleyEstimator estimator = {}) {
  return repeated_importance_with(
      method, repetitions, master_seed, [&](std::size_t, std::uint64_t seed) {
        const auto model = train_model(spec, dataset, seed);
        if (method == ImportanceMethod::kGlobalSurrogate) {
          return fit_global_surrogate(model, dataset, std::string(to_string(spec.kind)))
              .importances;
        }
        ShapleyEstimator est = estimator;
        est.seed = derive_seed(seed, 0x5356ULL);
        return shapley_summary(model, dataset, est).mean_abs;
      });
}

inline std::vector<std::size_t> select_top_k(const ImportanceAggregate& aggregate, std::size_t k) {
  if (k == 0 || k > aggregate.ranking.size()) {
    fail(ErrorKind::kSelection, "k=" + std::to_string(k) + " outside [1, " +
                                    std::to_string(aggregate.ranking.size()) + "]");
  }
  return {aggregate.ranking.begin(), aggregate.ranking.begin() + static_cast<std::ptrdiff_t>(k)};
}

struct SelectionResult {
  std::vector<std::size_t> selected;
  MetricsReport baseline;
  MetricsReport with_selection;

  double delta_acc() const { return with_selection.acc - baseline.acc; }
  double delta_auc() const { return with_selection.auc - baseline.auc; }
};

/// Cross-validates `spec` on all features and on `indices`; both runs use the
/// same fold assignment and per-fold model seeds.
inline SelectionResult evaluate_selection(const ModelSpec& spec, const Dataset& dataset,
                                          std::span<const std::size_t> indices,
                                          std::uint64_t cv_seed, std::size_t k_folds = 10) {
  SelectionResult out;
  const Dataset reduced = subset_features(dataset, indices);  // validates indices
  out.selected.assign(indices.begin(), indices.end());
  out.baseline = cross_validate(spec, dataset, k_folds, cv_seed);
  out.with_selection = cross_validate(spec, reduced, k_folds, cv_seed);
  return out;
}

}  // namespace bcx
