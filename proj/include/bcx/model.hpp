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

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/ensemble.hpp"
#include "bcx/error.hpp"
#include "bcx/forest.hpp"
#include "bcx/mlp.hpp"
#include "bcx/random.hpp"
#include "bcx/tree.hpp"

namespace bcx {

/// Anything that maps a batch of raw feature rows to malignancy
/// probabilities in [0, 1]. Every explanation routine is written against this.
template <typename M>
concept ProbabilisticModel = requires(const M& m, const Matrix& x) {
  { m.predict_proba(x) } -> std::convertible_to<Vector>;
};

/// Hard labels: the model's own rule when it has one, else threshold 0.5.
template <ProbabilisticModel M>
std::vector<Label> hard_labels(const M& model, const Matrix& x) {
  if constexpr (requires { { model.predict_labels(x) } -> std::convertible_to<std::vector<Label>>; }) {
    return model.predict_labels(x);
  } else {
    const Vector p = model.predict_proba(x);
    std::vector<Label> out(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      out[static_cast<std::size_t>(i)] = label_from_probability(p[i]);
    }
    return out;
  }
}

/// Adapts a per-row callable to ProbabilisticModel.
class FunctionModel {
 public:
  using RowFunction = std::function<double(std::span<const double>)>;

  explicit FunctionModel(RowFunction f) : f_(std::move(f)) {}

  Vector predict_proba(const Matrix& x) const {
    Vector out(x.rows());
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
      out[r] = f_(row);
    }
    return out;
  }

 private:
  RowFunction f_;
};

// ---------------------------------------------------------------------------

enum class ModelKind { kTree, kForest, kMlp, kEnsemble };

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTree: return "tree";
    case ModelKind::kForest: return "rf";
    case ModelKind::kMlp: return "nn";
    case ModelKind::kEnsemble: return "enn";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view name) {
  if (name == "tree" || name == "dt") return ModelKind::kTree;
  if (name == "rf") return ModelKind::kForest;
  if (name == "nn") return ModelKind::kMlp;
  if (name == "enn") return ModelKind::kEnsemble;
  return std::nullopt;
}

enum class InputScaling { kRaw, kStandardize };

inline std::string_view to_string(InputScaling s) {
  return s == InputScaling::kRaw ? "raw" : "standardize";
}

/// What to train: model family, its hyperparameters, and the input scaling
/// applied in front of it.
struct ModelSpec {
  ModelKind kind = ModelKind::kForest;
  TreeParams tree;
  ForestParams forest;
  MlpHyperparams mlp;
  std::vector<std::size_t> hidden_layers{40, 20, 10};
  InputScaling scaling = InputScaling::kRaw;

  static ModelSpec defaults(ModelKind kind) {
    ModelSpec spec;
    spec.kind = kind;
    // The single network sees raw features; the ensemble sees standardized
    // ones. Trees are scale invariant.
    spec.scaling = kind == ModelKind::kEnsemble ? InputScaling::kStandardize : InputScaling::kRaw;
    return spec;
  }
};

using ModelVariant = std::variant<DecisionTreeModel, ForestModel, MlpModel, EnsembleModel>;

/// A trained classifier operating on raw feature rows. Standardization, when
/// configured, is applied internally.
struct TrainedModel {
  ModelSpec spec;
  std::optional<StandardizationStats> scaler;
  ModelVariant model;
  std::uint64_t seed = 0;

  Matrix prepare(const Matrix& x) const { return scaler ? scaler->transform(x) : x; }

  Vector predict_proba(const Matrix& x) const {
    const Matrix input = prepare(x);
    return std::visit(
        [&](const auto& m) -> Vector {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, DecisionTreeModel>) {
            return tree_predict_proba(m, input);
          } else if constexpr (std::is_same_v<T, ForestModel>) {
            return forest_predict_proba(m, input);
          } else if constexpr (std::is_same_v<T, MlpModel>) {
            return mlp_forward(m, input);
          } else {
            const auto preds = ensemble_predict(m, input);
            Vector out(static_cast<Eigen::Index>(preds.size()));
            for (std::size_t i = 0; i < preds.size(); ++i) {
              out[static_cast<Eigen::Index>(i)] = preds[i].probability;
            }
            return out;
          }
        },
        model);
  }

  std::vector<Label> predict_labels(const Matrix& x) const {
    if (const auto* ens = std::get_if<EnsembleModel>(&model)) {
      const auto preds = ensemble_predict(*ens, prepare(x));
      std::vector<Label> out;
      out.reserve(preds.size());
      for (const auto& p : preds) out.push_back(p.label);
      return out;
    }
    const Vector p = predict_proba(x);
    std::vector<Label> out(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      out[static_cast<std::size_t>(i)] = label_from_probability(p[i]);
    }
    return out;
  }
};

/// Trains `spec` on the given rows; `seed` replaces every seed in the spec.
inline TrainedModel train_model(const ModelSpec& spec, const Matrix& x, std::span<const Label> y,
                                std::uint64_t seed) {
  TrainedModel out;
  out.spec = spec;
  out.seed = seed;
  Matrix input = x;
  if (spec.scaling == InputScaling::kStandardize) {
    Dataset view;
    view.features = x;
    view.descriptors.resize(static_cast<std::size_t>(x.cols()));
    for (std::size_t j = 0; j < view.descriptors.size(); ++j) view.descriptors[j].index = j;
    std::vector<std::size_t> rows(y.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    out.scaler = fit_standardizer(view, rows);
    input = out.scaler->transform(x);
  }
  switch (spec.kind) {
    case ModelKind::kTree: {
      TreeParams p = spec.tree;
      p.seed = seed;
      out.model = train_decision_tree(input, y, p);
      break;
    }
    case ModelKind::kForest: {
      ForestParams p = spec.forest;
      p.seed = seed;
      out.model = train_random_forest(input, y, p);
      break;
    }
    case ModelKind::kMlp: {
      MlpHyperparams h = spec.mlp;
      h.seed = seed;
      auto init = mlp_init(mlp_layer_sizes(static_cast<std::size_t>(x.cols()), spec.hidden_layers),
                           seed);
      out.model = mlp_train(std::move(init), input, y, h).model;
      break;
    }
    case ModelKind::kEnsemble: {
      MlpHyperparams h = spec.mlp;
      h.seed = seed;
      out.model = ensemble_train(input, y, h);
      break;
    }
  }
  return out;
}

inline TrainedModel train_model(const ModelSpec& spec, const Dataset& data, std::uint64_t seed) {
  return train_model(spec, data.features, data.labels, seed);
}

}  // namespace bcx
