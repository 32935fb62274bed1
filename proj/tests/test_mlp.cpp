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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "bcx/dataset.hpp"
#include "bcx/ensemble.hpp"
#include "bcx/mlp.hpp"
#include "properties.hpp"

namespace bcx {
namespace {

TEST(MlpInitTest, ShapesAndNorms) {
  const auto m = mlp_init({30, 40, 20, 10, 1}, 1);
  ASSERT_EQ(m.n_layers(), 4u);
  EXPECT_EQ(m.weights[0].rows(), 40);
  EXPECT_EQ(m.weights[0].cols(), 30);
  EXPECT_EQ(m.weights[1].rows(), 20);
  EXPECT_EQ(m.weights[3].rows(), 1);
  EXPECT_EQ(m.weights[3].cols(), 10);
  ASSERT_EQ(m.norms.size(), 3u);
  EXPECT_EQ(m.norms[2].gamma.size(), 10);
  EXPECT_DOUBLE_EQ(m.norms[0].momentum, 0.9);
  EXPECT_DOUBLE_EQ(m.norms[0].epsilon, 1e-5);
  const double limit = std::sqrt(6.0 / 70.0);
  EXPECT_LE(m.weights[0].cwiseAbs().maxCoeff(), limit);

  const auto tiny = mlp_init({2, 1}, 1);
  ASSERT_EQ(tiny.n_layers(), 1u);
  EXPECT_EQ(tiny.weights[0].rows(), 1);
  EXPECT_EQ(tiny.weights[0].cols(), 2);
  EXPECT_TRUE(tiny.norms.empty());

  EXPECT_THROW(mlp_init({3}, 1), Error);
  EXPECT_THROW(mlp_init({3, 0, 1}, 1), Error);
  EXPECT_THROW(mlp_init({3, 2}, 1), Error);
}

TEST(MlpForwardTest, ZeroWeightsGiveHalf) {
  auto m = mlp_init({3, 4, 1}, 2);
  for (auto& w : m.weights) w.setZero();
  Matrix x = Matrix::Random(5, 3);
  const Vector p = mlp_forward(m, x);
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p[i], 0.5);
}

TEST(MlpForwardTest, BatchOfOneInTrainModeFails) {
  auto m = mlp_init({3, 4, 1}, 2);
  Matrix x = Matrix::Ones(1, 3);
  try {
    mlp_forward(m, x, ForwardMode::kTrain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBatchNorm);
  }
  EXPECT_NO_THROW(mlp_forward(m, x, ForwardMode::kInfer));
}

TEST(MlpForwardTest, BatchNormStatistics) {
  const auto ds = load_wdbc(BCX_WDBC_PATH);
  auto m = mlp_init({30, 40, 20, 10, 1}, 3);
  m.weights[1] *= 100.0;
  m.weights[2] *= 100.0;
  const auto trace = mlp_forward_trace(m, Eigen::MatrixXd(ds.features.topRows(64)));
  ASSERT_EQ(trace.normalized.size(), 3u);
  for (const auto& zhat : trace.normalized) {
    const Eigen::RowVectorXd mean = zhat.colwise().mean();
    const Eigen::RowVectorXd var = zhat.array().square().colwise().mean().matrix() -
                                   mean.array().square().matrix();
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((var.array() - 1.0).abs().maxCoeff(), 1e-6);
  }
}

TEST(MlpForwardTest, TrainModeUpdatesRunningStats) {
  auto m = mlp_init({2, 3, 1}, 4);
  Matrix x(4, 2);
  x << 1, 2, 3, 4, 5, 7, 2, 0;
  const auto trace = mlp_forward_trace(m, Eigen::MatrixXd(x));
  mlp_forward(m, x, ForwardMode::kTrain);
  const Eigen::VectorXd expect_mean = 0.1 * trace.batch_mean[0];
  const Eigen::VectorXd expect_var =
      0.9 * Eigen::VectorXd::Ones(3) + 0.1 * trace.batch_var[0];
  EXPECT_LT((m.norms[0].running_mean - expect_mean).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((m.norms[0].running_var - expect_var).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MlpGradientTest, MatchesCentralDifferences) {
  EXPECT_LT(props::mlp_gradient_error(), 1e-4);
}

TEST(MlpBatchTest, SingletonTailMerged) {
  std::vector<std::size_t> order(129);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batches = make_batches(order, 64);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches[0].size(), 64u);
  EXPECT_EQ(batches[1].size(), 65u);
  const auto even = make_batches(std::span<const std::size_t>(order).first(128), 64);
  EXPECT_EQ(even.size(), 2u);
}

TEST(MlpTrainTest, SeparableToyReachesPerfectAccuracy) {
  Matrix x(20, 2);
  std::vector<Label> y(20);
  Rng rng(8);
  for (Eigen::Index i = 0; i < 20; ++i) {
    const bool pos = i % 2 == 1;
    x(i, 0) = (pos ? 1.0 : -1.0) + rng.uniform(-0.5, 0.5);
    x(i, 1) = rng.uniform(-1.0, 1.0);
    y[static_cast<std::size_t>(i)] = pos ? Label::kMalignant : Label::kBenign;
  }
  MlpHyperparams hp;
  hp.seed = 1;
  hp.batch_size = 8;
  const auto result = mlp_train(mlp_init({2, 40, 20, 10, 1}, 1), x, y, hp);
  const Vector p = mlp_forward(result.model, x);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(label_from_probability(p[static_cast<Eigen::Index>(i)]), y[i]) << i;
  }
}

TEST(MlpTrainTest, WdbcLossDecreasesAndIsDeterministic) {
  const auto ds = load_wdbc(BCX_WDBC_PATH);
  const auto z = apply_standardizer(ds, fit_standardizer(ds));
  MlpHyperparams hp;
  hp.epochs = 30;
  hp.seed = 6;
  const auto a = mlp_train(mlp_init({30, 40, 20, 10, 1}, 6), z.features, z.labels, hp);
  ASSERT_EQ(a.loss_trace.size(), 30u);
  EXPECT_LT(a.loss_trace.back(), a.loss_trace.front());
  for (const double l : a.loss_trace) EXPECT_TRUE(std::isfinite(l));
  const auto b = mlp_train(mlp_init({30, 40, 20, 10, 1}, 6), z.features, z.labels, hp);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(MlpTrainTest, DivergenceIsReported) {
  const auto ds = load_wdbc(BCX_WDBC_PATH);
  MlpHyperparams hp;
  hp.epochs = 50;
  hp.learning_rate = 1e308;
  try {
    mlp_train(mlp_init({30, 5, 1}, 1), ds.features, ds.labels, hp);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTraining);
  }
}

TEST(EnsembleTest, VoteAndMean) {
  const auto p = combine_members({0.9, 0.8, 0.1});
  EXPECT_EQ(p.label, Label::kMalignant);
  EXPECT_DOUBLE_EQ(p.probability, 0.6);
  const auto q = combine_members({0.9, 0.2, 0.1});
  EXPECT_EQ(q.label, Label::kBenign);
  // Vote and mean can disagree.
  const auto r = combine_members({0.51, 0.51, 0.0});
  EXPECT_EQ(r.label, Label::kMalignant);
  EXPECT_LT(r.probability, 0.5);
}

TEST(EnsembleTest, Architectures) {
  const auto& a = ensemble_architectures();
  EXPECT_EQ(a[0], (std::vector<std::size_t>{25, 10}));
  EXPECT_EQ(a[1], (std::vector<std::size_t>{40, 20, 10}));
  EXPECT_EQ(a[2], (std::vector<std::size_t>{25, 15, 10, 5}));
  EXPECT_EQ(mlp_layer_sizes(30, a[2]), (std::vector<std::size_t>{30, 25, 15, 10, 5, 1}));
}

}  // namespace
}  // namespace bcx
