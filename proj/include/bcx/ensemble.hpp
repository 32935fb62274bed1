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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/mlp.hpp"
#include "bcx/random.hpp"

namespace bcx {

/// Hidden-layer widths of the three ensemble members.
inline const std::array<std::vector<std::size_t>, 3>& ensemble_architectures() {
  static const std::array<std::vector<std::size_t>, 3> kArchitectures = {
      std::vector<std::size_t>{25, 10},
      std::vector<std::size_t>{40, 20, 10},
      std::vector<std::size_t>{25, 15, 10, 5},
  };
  return kArchitectures;
}

inline std::vector<std::size_t> mlp_layer_sizes(std::size_t n_inputs,
                                                std::span<const std::size_t> hidden) {
  std::vector<std::size_t> sizes{n_inputs};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

/// Three equally weighted MLPs combined by plurality vote.
struct EnsembleModel {
  std::array<MlpModel, 3> members;
};

struct EnsemblePrediction {
  Label label = Label::kBenign;
  /// Mean member probability; used for ranking only, the label comes from
  /// the vote.
  double probability = 0.0;
};

/// Member i is initialized and shuffled with derive_seed(seed, i).
inline EnsembleModel ensemble_train(const Matrix& x, std::span<const Label> y,
                                    const MlpHyperparams& hyper) {
  EnsembleModel out;
  const auto& archs = ensemble_architectures();
  for (std::size_t i = 0; i < archs.size(); ++i) {
    MlpHyperparams member_hyper = hyper;
    member_hyper.seed = derive_seed(hyper.seed, i);
    auto init = mlp_init(mlp_layer_sizes(static_cast<std::size_t>(x.cols()), archs[i]),
                         member_hyper.seed);
    out.members[i] = mlp_train(std::move(init), x, y, member_hyper).model;
  }
  return out;
}

/// Majority of three binary votes.
inline Label majority_vote(std::span<const Label> votes) {
  std::size_t malignant = 0;
  for (const auto v : votes) malignant += (v == Label::kMalignant);
  return 2 * malignant > votes.size() ? Label::kMalignant : Label::kBenign;
}

inline EnsemblePrediction combine_members(const std::array<double, 3>& probabilities) {
  std::array<Label, 3> votes{};
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    votes[i] = label_from_probability(probabilities[i]);
    sum += probabilities[i];
  }
  return {majority_vote(votes), sum / 3.0};
}

inline std::vector<EnsemblePrediction> ensemble_predict(const EnsembleModel& model,
                                                        const Matrix& x) {
  const Eigen::MatrixXd inputs(x);
  std::array<Eigen::VectorXd, 3> member_probs;
  for (std::size_t i = 0; i < 3; ++i) member_probs[i] = mlp_infer(model.members[i], inputs);
  std::vector<EnsemblePrediction> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out[static_cast<std::size_t>(r)] =
        combine_members({member_probs[0][r], member_probs[1][r], member_probs[2][r]});
  }
  return out;
}

inline EnsemblePrediction ensemble_predict(const EnsembleModel& model,
                                           std::span<const double> row) {
  Matrix x(1, static_cast<Eigen::Index>(row.size()));
  for (std::size_t j = 0; j < row.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = row[j];
  return ensemble_predict(model, x).front();
}

}  // namespace bcx
