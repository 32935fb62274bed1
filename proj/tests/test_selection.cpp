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

#include <algorithm>
#include <numeric>
#include <set>

#include "bcx/dataset.hpp"
#include "bcx/selection.hpp"

namespace bcx {
namespace {

/// 8 features; the label depends only on features 0, 1 and 2.
Dataset signal_dataset() {
  Rng rng(31);
  Dataset ds;
  const Eigen::Index n = 160;
  ds.features.resize(n, 8);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) ds.features(i, j) = rng.uniform(-1.0, 1.0);
    const double s = ds.features(i, 0) + 0.8 * ds.features(i, 1) - 0.9 * ds.features(i, 2);
    ds.labels.push_back(s > 0.0 ? Label::kMalignant : Label::kBenign);
    ds.ids.push_back(std::to_string(i));
  }
  {
    const auto all = wdbc_descriptors();
    ds.descriptors.assign(all.begin(), all.begin() + 8);
  }
  return ds;
}

TEST(AggregateTest, SingleRepetition) {
  const auto agg = aggregate_importances(ImportanceMethod::kShapley, {{1.0, 3.0, 0.0, 4.0}});
  EXPECT_EQ(agg.repetitions, 1u);
  EXPECT_EQ(agg.mean, (std::vector<double>{0.125, 0.375, 0.0, 0.5}));
  EXPECT_EQ(agg.std, (std::vector<double>(4, 0.0)));
  EXPECT_EQ(agg.ranking, (std::vector<std::size_t>{3, 1, 0, 2}));
}

TEST(AggregateTest, MeansSumToOneAndTiesToLowerIndex) {
  const auto agg = aggregate_importances(ImportanceMethod::kGlobalSurrogate,
                                         {{2.0, 2.0, 1.0}, {1.0, 1.0, 3.0}, {5.0, 5.0, 0.0}});
  EXPECT_NEAR(std::accumulate(agg.mean.begin(), agg.mean.end(), 0.0), 1.0, 1e-9);
  EXPECT_EQ(agg.ranking[0], 0u);
  EXPECT_EQ(agg.ranking[1], 1u);
  for (const double s : agg.std) EXPECT_GE(s, 0.0);
}

TEST(AggregateTest, OrderIndependent) {
  std::vector<std::vector<double>> reps{{0.1, 0.7, 0.2}, {0.3, 0.3, 0.4}, {0.6, 0.1, 0.3}};
  const auto a = aggregate_importances(ImportanceMethod::kShapley, reps);
  // Repetition r depends only on (r, derive_seed(master, r)).
  const auto b = repeated_importance_with(ImportanceMethod::kShapley, 3, 5,
                                          [&](std::size_t r, std::uint64_t seed) {
                                            EXPECT_EQ(seed, derive_seed(5, r));
                                            return reps[r];
                                          });
  std::vector<std::vector<double>> reversed(reps.rbegin(), reps.rend());
  const auto c = aggregate_importances(ImportanceMethod::kShapley, reversed);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a.mean[j], c.mean[j], 1e-15);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std, b.std);
}

TEST(AggregateTest, RepetitionErrorsAreTagged) {
  try {
    repeated_importance_with(ImportanceMethod::kShapley, 4, 1,
                             [](std::size_t r, std::uint64_t) -> std::vector<double> {
                               if (r == 2) fail(ErrorKind::kTraining, "diverged");
                               return {1.0};
                             });
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("repetition 2"), std::string::npos);
  }
}

TEST(SelectTest, PrefixAndBounds) {
  const auto agg = aggregate_importances(ImportanceMethod::kShapley, {{0.1, 0.4, 0.2, 0.3}});
  EXPECT_EQ(select_top_k(agg, 4), agg.ranking);
  const auto k2 = select_top_k(agg, 2);
  const auto k3 = select_top_k(agg, 3);
  EXPECT_TRUE(std::equal(k2.begin(), k2.end(), k3.begin()));
  EXPECT_EQ(select_top_k(agg, 1), (std::vector<std::size_t>{1}));
  for (const std::size_t k : {std::size_t{0}, std::size_t{5}}) {
    try {
      select_top_k(agg, k);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kSelection);
    }
  }
}

TEST(RepeatedImportanceTest, SignalFeaturesRankHigh) {
  const auto ds = signal_dataset();
  auto spec = ModelSpec::defaults(ModelKind::kForest);
  spec.forest.n_trees = 30;
  const std::set<std::size_t> signal{0, 1, 2};
  for (const auto method : {ImportanceMethod::kGlobalSurrogate, ImportanceMethod::kShapley}) {
    ShapleyEstimator est;
    est.permutations = 16;
    est.background_size = 20;
    const auto agg = repeated_importance(method, spec, ds, 3, 8, est);
    EXPECT_NEAR(std::accumulate(agg.mean.begin(), agg.mean.end(), 0.0), 1.0, 1e-9);
    const auto top = select_top_k(agg, 5);
    for (const auto f : signal) {
      EXPECT_NE(std::find(top.begin(), top.end(), f), top.end())
          << to_string(method) << " misses feature " << f;
    }
    const auto again = repeated_importance(method, spec, ds, 3, 8, est);
    EXPECT_EQ(agg.mean, again.mean);
  }
}

TEST(RepeatedImportanceTest, SingleFeatureModelRanksItFirst) {
  Dataset ds = signal_dataset();
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    ds.labels[static_cast<std::size_t>(i)] = ds.features(i, 0) > 0 ? Label::kMalignant : Label::kBenign;
  }
  auto spec = ModelSpec::defaults(ModelKind::kTree);
  const auto agg = repeated_importance(ImportanceMethod::kGlobalSurrogate, spec, ds, 2, 1);
  EXPECT_EQ(select_top_k(agg, 1), (std::vector<std::size_t>{0}));
}

TEST(EvaluateSelectionTest, AllFeaturesIsNoOp) {
  const auto ds = signal_dataset();
  auto spec = ModelSpec::defaults(ModelKind::kForest);
  spec.forest.n_trees = 10;
  std::vector<std::size_t> all(8);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto r = evaluate_selection(spec, ds, all, 3, 5);
  EXPECT_EQ(r.baseline.cm, r.with_selection.cm);
  EXPECT_EQ(r.delta_acc(), 0.0);
  EXPECT_EQ(r.delta_auc(), 0.0);
  const std::vector<std::size_t> bad{9};
  EXPECT_THROW(evaluate_selection(spec, ds, bad, 3, 5), Error);
}

}  // namespace
}  // namespace bcx
