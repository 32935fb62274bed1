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
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"
#include "bcx/model.hpp"
#include "bcx/random.hpp"

namespace bcx {

inline constexpr std::size_t kMaxExactShapleyFeatures = 12;

enum class ShapleyMode { kExact, kSampled };

struct ShapleyEstimator {
  ShapleyMode mode = ShapleyMode::kSampled;
  std::size_t permutations = 128;
  std::size_t background_size = 100;
  std::uint64_t seed = 0;
};

struct ShapleyExplanation {
  std::size_t instance_index = 0;
  /// Mean model output over the background.
  double base_value = 0.0;
  std::vector<double> attributions;
  ShapleyMode mode = ShapleyMode::kSampled;
  std::size_t permutations = 0;
  std::size_t background_size = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_background(const Matrix& background, std::span<const double> instance) {
  if (background.rows() == 0) fail(ErrorKind::kShape, "Shapley background is empty");
  if (static_cast<std::size_t>(background.cols()) != instance.size()) {
    fail(ErrorKind::kShape, "instance has " + std::to_string(instance.size()) +
                                " features, background has " + std::to_string(background.cols()));
  }
}

}  // namespace detail

/// Exact Shapley values by enumerating all 2^d coalitions. Coalition value
/// v(S) is the mean model output over background rows with the features in S
/// taken from the instance.
template <ProbabilisticModel M>
ShapleyExplanation shapley_exact(const M& model, std::span<const double> instance,
                                 const Matrix& background) {
  detail::check_background(background, instance);
  const std::size_t d = instance.size();
  if (d > kMaxExactShapleyFeatures) {
    fail(ErrorKind::kUseSampledEstimator,
         std::to_string(d) + " features exceeds the exact limit of " +
             std::to_string(kMaxExactShapleyFeatures));
  }
  const std::size_t n_coalitions = std::size_t{1} << d;
  const auto nb = background.rows();
  Matrix probe(static_cast<Eigen::Index>(n_coalitions) * nb, static_cast<Eigen::Index>(d));
  for (std::size_t s = 0; s < n_coalitions; ++s) {
    for (Eigen::Index b = 0; b < nb; ++b) {
      const auto row = static_cast<Eigen::Index>(s) * nb + b;
      for (std::size_t j = 0; j < d; ++j) {
        probe(row, static_cast<Eigen::Index>(j)) =
            (s >> j & 1U) ? instance[j] : background(b, static_cast<Eigen::Index>(j));
      }
    }
  }
  const Vector outputs = model.predict_proba(probe);
  std::vector<double> value(n_coalitions, 0.0);
  for (std::size_t s = 0; s < n_coalitions; ++s) {
    value[s] = outputs.segment(static_cast<Eigen::Index>(s) * nb, nb).mean();
  }
  // weight(|S|) = |S|! (d - |S| - 1)! / d!
  std::vector<double> weight(d, 0.0);
  for (std::size_t size = 0; size < d; ++size) {
    weight[size] = std::exp(std::lgamma(static_cast<double>(size + 1)) +
                            std::lgamma(static_cast<double>(d - size)) -
                            std::lgamma(static_cast<double>(d + 1)));
  }
  ShapleyExplanation out;
  out.base_value = value[0];
  out.attributions.assign(d, 0.0);
  out.mode = ShapleyMode::kExact;
  out.background_size = static_cast<std::size_t>(nb);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double phi = 0.0;
    for (std::size_t s = 0; s < n_coalitions; ++s) {
      if (s & bit) continue;
      phi += weight[static_cast<std::size_t>(std::popcount(s))] * (value[s | bit] - value[s]);
    }
    out.attributions[i] = phi;
  }
  return out;
}

/// Monte-Carlo permutation estimator. Each draw picks a feature order and a
/// background row, then walks from the background row to the instance one
/// feature at a time; each step's change in output is credited to the feature
/// that was switched.
template <ProbabilisticModel M>
ShapleyExplanation shapley_sampled(const M& model, std::span<const double> instance,
                                   const Matrix& background, std::size_t permutations,
                                   std::uint64_t seed) {
  detail::check_background(background, instance);
  if (permutations == 0) fail(ErrorKind::kConfig, "permutation count must be positive");
  const std::size_t d = instance.size();
  const auto steps = static_cast<Eigen::Index>(d + 1);
  Matrix probe(static_cast<Eigen::Index>(permutations) * steps, static_cast<Eigen::Index>(d));
  std::vector<std::size_t> order(d);
  std::vector<std::size_t> orders(permutations * d);
  Rng rng(seed);
  for (std::size_t m = 0; m < permutations; ++m) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    const auto b = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(background.rows())));
    const auto base_row = static_cast<Eigen::Index>(m) * steps;
    probe.row(base_row) = background.row(b);
    for (std::size_t k = 0; k < d; ++k) {
      const auto row = base_row + static_cast<Eigen::Index>(k) + 1;
      probe.row(row) = probe.row(row - 1);
      probe(row, static_cast<Eigen::Index>(order[k])) = instance[order[k]];
    }
    std::copy(order.begin(), order.end(), orders.begin() + static_cast<std::ptrdiff_t>(m * d));
  }
  const Vector outputs = model.predict_proba(probe);

  ShapleyExplanation out;
  out.base_value = model.predict_proba(background).mean();
  out.attributions.assign(d, 0.0);
  out.mode = ShapleyMode::kSampled;
  out.permutations = permutations;
  out.background_size = static_cast<std::size_t>(background.rows());
  out.seed = seed;
  for (std::size_t m = 0; m < permutations; ++m) {
    const auto base_row = static_cast<Eigen::Index>(m) * steps;
    for (std::size_t k = 0; k < d; ++k) {
      const auto row = base_row + static_cast<Eigen::Index>(k) + 1;
      out.attributions[orders[m * d + k]] += outputs[row] - outputs[row - 1];
    }
  }
  for (auto& phi : out.attributions) phi /= static_cast<double>(permutations);
  return out;
}

/// Up to `size` distinct rows drawn by seed, in increasing row order.
inline std::vector<std::size_t> sample_background_rows(std::size_t n_rows, std::size_t size,
                                                       std::uint64_t seed) {
  std::vector<std::size_t> rows(n_rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (size >= n_rows) return rows;
  Rng rng(seed);
  for (std::size_t i = 0; i < size; ++i) std::swap(rows[i], rows[i + rng.below(n_rows - i)]);
  rows.resize(size);
  std::sort(rows.begin(), rows.end());
  return rows;
}

/// Attributions for every sample of a dataset.
struct ShapleySummary {
  /// n_samples x n_features.
  Matrix attributions;
  /// Feature values behind each attribution (for the summary-plot colour).
  Matrix feature_values;
  double base_value = 0.0;
  std::vector<double> mean_abs;
  /// Feature indices by non-increasing mean |attribution|, ties to the lower index.
  std::vector<std::size_t> ranking;
  ShapleyEstimator estimator;
};

inline std::vector<std::size_t> rank_descending(std::span<const double> values) {
  std::vector<std::size_t> ranking(values.size());
  std::iota(ranking.begin(), ranking.end(), std::size_t{0});
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return ranking;
}

/// Background rows come from `dataset` (see sample_background_rows); sample
/// i uses estimator seed derive_seed(seed, i).
template <ProbabilisticModel M>
ShapleySummary shapley_summary(const M& model, const Dataset& dataset,
                               const ShapleyEstimator& estimator) {
  const auto bg_rows = sample_background_rows(
      dataset.n_samples(), estimator.background_size,
      derive_seed(estimator.seed, 0x4247ULL));
  Matrix background(static_cast<Eigen::Index>(bg_rows.size()), dataset.features.cols());
  for (std::size_t r = 0; r < bg_rows.size(); ++r) {
    background.row(static_cast<Eigen::Index>(r)) =
        dataset.features.row(static_cast<Eigen::Index>(bg_rows[r]));
  }
  ShapleySummary out;
  out.estimator = estimator;
  out.feature_values = dataset.features;
  out.attributions.resize(dataset.features.rows(), dataset.features.cols());
  std::vector<double> instance(dataset.n_features());
  for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
    for (std::size_t j = 0; j < instance.size(); ++j) {
      instance[j] = dataset.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const auto expl = estimator.mode == ShapleyMode::kExact
                          ? shapley_exact(model, instance, background)
                          : shapley_sampled(model, instance, background, estimator.permutations,
                                            derive_seed(estimator.seed, i));
    if (i == 0) out.base_value = expl.base_value;
    for (std::size_t j = 0; j < instance.size(); ++j) {
      out.attributions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          expl.attributions[j];
    }
  }
  out.mean_abs.resize(dataset.n_features());
  for (std::size_t j = 0; j < out.mean_abs.size(); ++j) {
    out.mean_abs[j] = out.attributions.col(static_cast<Eigen::Index>(j)).cwiseAbs().mean();
  }
  out.ranking = rank_descending(out.mean_abs);
  return out;
}

}  // namespace bcx
