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
#include <string>

#include <Eigen/Dense>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"

namespace bcx {

struct PcaProjection {
  /// n_components x d, orthonormal rows.
  Matrix components;
  /// Covariance eigenvalues of the kept components, non-increasing.
  Vector explained_variance;
  /// Fraction of total variance per kept component.
  Vector explained_variance_ratio;
  Vector mean;
  /// n x n_components.
  Matrix coordinates;

  Matrix project(const Matrix& x) const {
    return (x.rowwise() - mean.transpose()) * components.transpose();
  }

  Matrix reconstruct(const Matrix& coords) const {
    return (coords * components).rowwise() + mean.transpose();
  }
};

/// Principal components from the eigendecomposition of the sample
/// covariance. Each component is signed so its largest-magnitude loading is
/// positive.
inline PcaProjection pca_fit_project(const Matrix& x, std::size_t n_components = 2) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (n < 2) fail(ErrorKind::kDegeneracy, "PCA needs at least 2 samples");
  if (n_components == 0 || static_cast<Eigen::Index>(n_components) > d) {
    fail(ErrorKind::kConfig, "n_components must be in [1, " + std::to_string(d) + "]");
  }
  PcaProjection out;
  out.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - out.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorKind::kDegeneracy, "eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd values = eig.eigenvalues();
  const double total = values.cwiseMax(0.0).sum();
  const auto k = static_cast<Eigen::Index>(n_components);
  const double tolerance = 1e-12 * std::max(total, 1e-300);
  out.components.resize(k, d);
  out.explained_variance.resize(k);
  out.explained_variance_ratio.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index src = d - 1 - c;
    if (!(values[src] > tolerance)) {
      fail(ErrorKind::kDegeneracy, "data has fewer than " + std::to_string(n_components) +
                                       " non-degenerate directions");
    }
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    out.components.row(c) = v.transpose();
    out.explained_variance[c] = values[src];
    out.explained_variance_ratio[c] = values[src] / total;
  }
  out.coordinates = out.project(x);
  return out;
}

}  // namespace bcx
