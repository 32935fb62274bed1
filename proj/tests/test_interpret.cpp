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

#include <numeric>

#include "bcx/dataset.hpp"
#include "bcx/ice.hpp"
#include "bcx/pca.hpp"
#include "bcx/shapley.hpp"
#include "bcx/surrogate.hpp"
#include "properties.hpp"

namespace bcx {
namespace {

Dataset ramp_dataset() {
  Dataset ds;
  ds.features.resize(100, 2);
  for (Eigen::Index i = 0; i < 100; ++i) {
    ds.features(i, 0) = static_cast<double>(i);
    ds.features(i, 1) = static_cast<double>((i * 37) % 11);
    ds.labels.push_back(i < 50 ? Label::kBenign : Label::kMalignant);
    ds.ids.push_back(std::to_string(i));
  }
  {
    const auto all = wdbc_descriptors();
    ds.descriptors.assign(all.begin(), all.begin() + 2);
  }
  return ds;
}

TEST(IceTest, GridCurvesAndPdp) {
  const auto ds = ramp_dataset();
  const FunctionModel model([](std::span<const double> x) { return 1.0 / (1.0 + std::exp(-x[1])); });
  const auto ice = ice_curves(model, ds, 0);
  ASSERT_EQ(ice.grid.size(), 100);
  for (Eigen::Index j = 0; j < 100; ++j) EXPECT_DOUBLE_EQ(ice.grid[j], static_cast<double>(j));
  EXPECT_EQ(ice.curves.rows(), 100);
  // Feature 0 is never read: flat curves.
  for (Eigen::Index r = 0; r < ice.curves.rows(); ++r) {
    EXPECT_EQ(ice.curves.row(r).maxCoeff(), ice.curves.row(r).minCoeff());
  }
  const auto read = ice_curves(model, ds, 1, 7);
  const Vector mean = read.curves.colwise().mean().transpose();
  EXPECT_LT((mean - read.pdp).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(read.pdp[6], read.pdp[0]);
}

TEST(IceTest, ConstantFeatureIsDegenerate) {
  auto ds = ramp_dataset();
  ds.features.col(1).setConstant(3.0);
  const FunctionModel model([](std::span<const double>) { return 0.5; });
  try {
    ice_curves(model, ds, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateFeature);
  }
}

TEST(ShapleyTest, AdditiveClosedForm) {
  const FunctionModel model([](std::span<const double> x) { return x[0] + x[1]; });
  Matrix bg(3, 3);
  bg << 1, 2, 5, 3, 0, 5, 2, 7, 1;
  const std::vector<double> x{4.0, -1.0, 9.0};
  const auto e = shapley_exact(model, x, bg);
  EXPECT_NEAR(e.attributions[0], 4.0 - 2.0, 1e-12);
  EXPECT_NEAR(e.attributions[1], -1.0 - 3.0, 1e-12);
  EXPECT_EQ(e.attributions[2], 0.0);
}

TEST(ShapleyTest, ProductSingleBackground) {
  const auto model = props::product_model();
  Matrix bg = Matrix::Zero(1, 2);
  const std::vector<double> x{1.0, 1.0};
  const auto e = shapley_exact(model, x, bg);
  EXPECT_DOUBLE_EQ(e.attributions[0], 0.5);
  EXPECT_DOUBLE_EQ(e.attributions[1], 0.5);
  EXPECT_DOUBLE_EQ(e.base_value, 0.0);
}

TEST(ShapleyTest, ExactAxiomsAndOracle) { EXPECT_LT(props::shapley_axiom_error(), 1e-9); }

TEST(ShapleyTest, TooManyFeaturesForExact) {
  const FunctionModel model([](std::span<const double>) { return 0.0; });
  const Matrix bg = Matrix::Zero(1, 13);
  const std::vector<double> x(13, 1.0);
  try {
    shapley_exact(model, x, bg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUseSampledEstimator);
  }
}

TEST(ShapleyTest, SampledConvergesToExact) {
  const double e10 = props::shapley_sampling_error(10);
  const double e100 = props::shapley_sampling_error(100);
  const double e2000 = props::shapley_sampling_error(2000);
  EXPECT_GT(e10, e100);
  EXPECT_GT(e100, e2000);
  EXPECT_LT(e2000, 0.01);
}

TEST(ShapleyTest, SampledTelescopesAndIsDeterministic) {
  const FunctionModel model([](std::span<const double> x) { return std::sin(x[0]) * x[1] + x[2]; });
  Matrix bg(5, 3);
  bg << 0, 1, 2, 1, 0, 1, 2, 2, 0, 0.5, 0.5, 0.5, 3, 1, 1;
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto a = shapley_sampled(model, x, bg, 50, 7);
  const auto b = shapley_sampled(model, x, bg, 50, 7);
  EXPECT_EQ(a.attributions, b.attributions);
  // With one background row every draw telescopes to f(x) - f(b).
  const Matrix one = bg.row(3);
  const auto c = shapley_sampled(model, x, one, 50, 7);
  const double total = std::accumulate(c.attributions.begin(), c.attributions.end(), 0.0);
  const double fx = model.predict_proba(Matrix::Map(x.data(), 1, 3))[0];
  EXPECT_NEAR(total, fx - model.predict_proba(one)[0], 1e-12);
  EXPECT_NEAR(c.base_value, model.predict_proba(one)[0], 1e-15);
}

TEST(ShapleyTest, SummaryRanksTheOnlyReadFeature) {
  const auto ds = ramp_dataset();
  const FunctionModel model([](std::span<const double> x) { return x[1] / 10.0; });
  ShapleyEstimator est;
  est.mode = ShapleyMode::kExact;
  est.background_size = 20;
  const auto s = shapley_summary(model, ds, est);
  EXPECT_EQ(s.ranking.front(), 1u);
  EXPECT_EQ(s.mean_abs[0], 0.0);
  std::vector<double> scaled = s.mean_abs;
  for (auto& v : scaled) v *= 3.5;
  EXPECT_EQ(rank_descending(scaled), s.ranking);
}

TEST(SurrogateTest, SelfDistillationIsExact) {
  const auto ds = load_wdbc(BCX_WDBC_PATH);
  const FunctionModel stump([](std::span<const double> x) { return x[0] > 15.0 ? 1.0 : 0.0; });
  const auto rep = fit_global_surrogate(stump, ds, "stump");
  EXPECT_DOUBLE_EQ(rep.r2, 1.0);
  EXPECT_DOUBLE_EQ(rep.agreement, 1.0);
  EXPECT_EQ(rep.surrogate.depth(), 1u);
  EXPECT_EQ(rep.surrogate.root().feature, 0);
}

TEST(SurrogateTest, SingleClassBlackBoxIsDegenerate) {
  const auto ds = load_wdbc(BCX_WDBC_PATH);
  const FunctionModel constant([](std::span<const double>) { return 0.1; });
  try {
    fit_global_surrogate(constant, ds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateTarget);
  }
}

TEST(PcaTest, LineDataAndDegeneracy) {
  Matrix x(6, 2);
  for (Eigen::Index i = 0; i < 6; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = 2.0 * static_cast<double>(i) + 1.0;
  }
  const auto p = pca_fit_project(x, 1);
  EXPECT_NEAR(p.explained_variance_ratio[0], 1.0, 1e-9);
  EXPECT_GT(p.components(0, 1), 0.0);
  try {
    pca_fit_project(x, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegeneracy);
  }
}

TEST(PcaTest, OrthonormalOrderedCenteredAndEckartYoung) {
  EXPECT_LT(props::pca_orthonormality_error(), 1e-9);
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    Matrix x(50, 5);
    for (Eigen::Index i = 0; i < 50; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) x(i, j) = rng.uniform(-1.0, 1.0) * static_cast<double>(5 - j);
    }
    const auto two = pca_fit_project(x, 2);
    const auto one = pca_fit_project(x, 1);
    EXPECT_GE(two.explained_variance[0], two.explained_variance[1]);
    EXPECT_LT(two.coordinates.colwise().mean().cwiseAbs().maxCoeff(), 1e-9);
    const double err2 = (two.reconstruct(two.coordinates) - x).squaredNorm();
    const double err1 = (one.reconstruct(one.coordinates) - x).squaredNorm();
    EXPECT_LE(err2, err1);
    // Leading direction agrees with power iteration on the covariance.
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    const Eigen::VectorXd v = oracle::power_iteration(c.transpose() * c);
    EXPECT_NEAR(std::abs(v.dot(two.components.row(0).transpose())), 1.0, 1e-6);
  }
}

}  // namespace
}  // namespace bcx
