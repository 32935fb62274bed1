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
#include <string>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"
#include "bcx/model.hpp"

namespace bcx {

inline constexpr std::size_t kIceGridPoints = 100;

/// Individual conditional expectation curves for one feature.
struct IceResult {
  std::size_t feature_index = 0;
  /// Equally spaced from the feature minimum to its maximum, inclusive.
  Vector grid;
  /// curves(i, j): probability for sample i with the feature set to grid[j].
  Matrix curves;
  /// Partial dependence: column means of `curves`.
  Vector pdp;
};

/// Grid values are in the units of `dataset` (raw units for TrainedModel,
/// which scales internally).
template <ProbabilisticModel M>
IceResult ice_curves(const M& model, const Dataset& dataset, std::size_t feature_index,
                     std::size_t grid_points = kIceGridPoints) {
  if (feature_index >= dataset.n_features()) {
    fail(ErrorKind::kSelection, "feature index " + std::to_string(feature_index) + " out of range");
  }
  if (grid_points < 2) fail(ErrorKind::kConfig, "ICE grid needs at least 2 points");
  const auto col = dataset.features.col(static_cast<Eigen::Index>(feature_index));
  const double lo = col.minCoeff();
  const double hi = col.maxCoeff();
  if (!(lo < hi)) {
    fail(ErrorKind::kDegenerateFeature,
         "feature '" + dataset.descriptors[feature_index].name() + "' is constant");
  }
  IceResult out;
  out.feature_index = feature_index;
  const auto g = static_cast<Eigen::Index>(grid_points);
  out.grid.resize(g);
  for (Eigen::Index j = 0; j < g; ++j) {
    out.grid[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(g - 1);
  }
  out.grid[g - 1] = hi;

  out.curves.resize(dataset.features.rows(), g);
  Matrix probe = dataset.features;
  for (Eigen::Index j = 0; j < g; ++j) {
    probe.col(static_cast<Eigen::Index>(feature_index)).setConstant(out.grid[j]);
    out.curves.col(j) = model.predict_proba(probe);
  }
  out.pdp = out.curves.colwise().mean().transpose();
  return out;
}

}  // namespace bcx
