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

// Dataset-independent property checks. Each returns the worst observed
// deviation so callers can compare it against their own tolerance.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/metrics.hpp"
#include "bcx/mlp.hpp"
#include "bcx/model.hpp"
#include "bcx/pca.hpp"
#include "bcx/shapley.hpp"
#include "oracles.hpp"

namespace bcx::props {

/// f(x) = x1 * x2 evaluated row-wise.
inline FunctionModel product_model() {
  return FunctionModel([](std::span<const double> x) { return x[0] * x[1]; });
}

/// Background of the product toy: 8 rows on the unit square.
inline Matrix product_background() {
  Matrix bg(8, 2);
  bg << 0.0, 0.0, 0.2, 0.9, 0.4, 0.1, 0.6, 0.7, 0.8, 0.3, 1.0, 0.5, 0.3, 0.6, 0.7, 0.2;
  return bg;
}

/// Mean |sampled - exact| over both features and `seeds` seeds.
inline double shapley_sampling_error(std::size_t permutations, std::size_t seeds = 20) {
  const auto model = product_model();
  const Matrix bg = product_background();
  const std::vector<double> x{1.0, 1.0};
  const auto exact = shapley_exact(model, x, bg);
  double err = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto est = shapley_sampled(model, x, bg, permutations, derive_seed(1234, s));
    for (std::size_t j = 0; j < 2; ++j) err += std::abs(est.attributions[j] - exact.attributions[j]);
  }
  return err / static_cast<double>(2 * seeds);
}

/// Efficiency, dummy and symmetry in exact mode, plus agreement with the
/// permutation-enumeration oracle, on random small models.
inline double shapley_axiom_error(std::size_t trials = 30) {
  Rng rng(99);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t d = 3 + rng.below(3);
    std::vector<double> w(d);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    // Features 0 and 1 play symmetric roles; the last feature is never read.
    w[1] = w[0];
    const auto f = [w, d](std::span<const double> x) {
      double s = w[0] * x[0] * x[1];
      for (std::size_t j = 2; j + 1 < d; ++j) s += w[j] * x[j] * x[j];
      return std::tanh(s + w[0] * (x[0] + x[1]));
    };
    const FunctionModel model(f);
    Matrix bg(4, static_cast<Eigen::Index>(d));
    std::vector<std::vector<double>> bg_rows(4, std::vector<double>(d));
    for (Eigen::Index r = 0; r < 4; ++r) {
      for (Eigen::Index j = 0; j < bg.cols(); ++j) {
        bg(r, j) = rng.uniform(-1.0, 1.0);
        bg_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = bg(r, j);
      }
    }
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    x[1] = x[0];
    for (Eigen::Index r = 0; r < 4; ++r) bg(r, 1) = bg(r, 0), bg_rows[static_cast<std::size_t>(r)][1] = bg(r, 0);
    const auto e = shapley_exact(model, x, bg);
    const double total = std::accumulate(e.attributions.begin(), e.attributions.end(), 0.0);
    worst = std::max(worst, std::abs(e.base_value + total - f(x)));
    worst = std::max(worst, std::abs(e.attributions[d - 1]));
    worst = std::max(worst, std::abs(e.attributions[0] - e.attributions[1]));
    const auto ref = oracle::shapley_by_permutations(
        [&](const std::vector<double>& z) { return f(z); }, x, bg_rows);
    for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::abs(ref[j] - e.attributions[j]));
  }
  return worst;
}

/// Largest relative error between backprop and central differences.
inline double mlp_gradient_error() {
  auto m = mlp_init({3, 5, 4, 1}, 17);
  Rng rng(5);
  for (auto& bn : m.norms) {
    for (Eigen::Index i = 0; i < bn.gamma.size(); ++i) {
      bn.gamma[i] = rng.uniform(0.5, 1.5);
      bn.beta[i] = rng.uniform(-0.5, 0.5);
    }
  }
  for (auto& b : m.biases) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-0.3, 0.3);
  }
  Eigen::MatrixXd x(7, 3);
  Eigen::VectorXd y(7);
  for (Eigen::Index i = 0; i < 7; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.uniform(-2.0, 2.0);
    y[i] = static_cast<double>(i % 2);
  }
  MlpGradients grad;
  mlp_loss_and_gradients(m, x, y, grad);
  const auto loss = [&] {
    MlpGradients g;
    return mlp_loss_and_gradients(m, x, y, g);
  };
  const double h = 1e-5;
  double worst = 0.0;
  const auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = loss();
    param = saved - h;
    const double down = loss();
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  };
  for (std::size_t l = 0; l < m.n_layers(); ++l) {
    for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) {
      check(m.weights[l].data()[i], grad.weights[l].data()[i]);
    }
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) check(m.biases[l][i], grad.biases[l][i]);
  }
  for (std::size_t l = 0; l < m.norms.size(); ++l) {
    for (Eigen::Index i = 0; i < m.norms[l].gamma.size(); ++i) {
      check(m.norms[l].gamma[i], grad.gamma[l][i]);
      check(m.norms[l].beta[i], grad.beta[l][i]);
    }
  }
  return worst;
}

/// Largest |rank AUC - pair counting| and |trapezoid - pair counting|.
inline double auc_equivalence_error(std::size_t trials = 300) {
  Rng rng(77);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 2 + rng.below(199);
    const std::size_t levels = 1 + rng.below(20);
    std::vector<double> scores;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(static_cast<double>(rng.below(levels)) / static_cast<double>(levels));
      labels.push_back(rng.uniform() < 0.4 ? Label::kMalignant : Label::kBenign);
    }
    labels[0] = Label::kMalignant;
    labels[1] = Label::kBenign;
    const double ref = oracle::pair_counting_auc(scores, labels);
    worst = std::max(worst, std::abs(roc_auc(scores, labels) - ref));
    worst = std::max(worst, std::abs(trapezoidal_area(roc_curve(scores, labels)) - ref));
  }
  return worst;
}

/// True when every random fold assignment is a stratified partition.
inline bool fold_invariants_hold(std::size_t trials = 50) {
  Rng rng(5);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 20 + rng.below(200);
    const std::size_t k = 2 + rng.below(9);
    std::vector<Label> labels(n);
    std::size_t pos = 0;
    for (auto& l : labels) {
      l = rng.uniform() < 0.4 ? Label::kMalignant : Label::kBenign;
      pos += l == Label::kMalignant;
    }
    if (pos < k || n - pos < k) continue;
    const auto seed = rng();
    const auto folds = stratified_folds(labels, k, seed);
    std::vector<int> seen(n, 0);
    for (std::size_t f = 0; f < k; ++f) {
      double fold_pos = 0, fold_neg = 0;
      for (const auto i : folds.test_indices(f)) {
        ++seen[i];
        (labels[i] == Label::kMalignant ? fold_pos : fold_neg) += 1;
      }
      if (std::abs(fold_pos - static_cast<double>(pos) / static_cast<double>(k)) > 1.0) return false;
      if (std::abs(fold_neg - static_cast<double>(n - pos) / static_cast<double>(k)) > 1.0) return false;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; })) return false;
    if (stratified_folds(labels, k, seed).fold_of != folds.fold_of) return false;
  }
  return true;
}

/// Largest relative round-trip error of standardize then invert.
inline double standardization_roundtrip_error(std::size_t trials = 20) {
  Rng rng(11);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Dataset ds;
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.below(100));
    ds.features.resize(n, 5);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) ds.features(i, j) = rng.uniform(-1.0, 1.0) * std::pow(10.0, static_cast<double>(j));
      ds.labels.push_back(i % 2 ? Label::kMalignant : Label::kBenign);
      ds.ids.push_back(std::to_string(i));
    }
    {
    const auto all = wdbc_descriptors();
    ds.descriptors.assign(all.begin(), all.begin() + 5);
  }
    const auto stats = fit_standardizer(ds);
    const Matrix back = stats.inverse(stats.transform(ds.features));
    worst = std::max(worst, ((back - ds.features).array().abs() /
                             ds.features.array().abs().max(1.0)).maxCoeff());
  }
  return worst;
}

/// Largest |C C^T - I| entry over random inputs.
inline double pca_orthonormality_error(std::size_t trials = 20) {
  Rng rng(3);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Matrix x(50, 5);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(-1.0, 1.0) * static_cast<double>(j + 1);
    }
    const auto p = pca_fit_project(x, 2);
    const Eigen::MatrixXd gram = p.components * p.components.transpose();
    worst = std::max(worst, (gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace bcx::props
