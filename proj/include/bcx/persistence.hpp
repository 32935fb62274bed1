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
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcx/ensemble.hpp"
#include "bcx/error.hpp"
#include "bcx/forest.hpp"
#include "bcx/mlp.hpp"
#include "bcx/model.hpp"
#include "bcx/tree.hpp"

namespace bcx {

// Versioned JSON model documents. Doubles are written with 17 significant
// digits, so a load reproduces every parameter bit for bit.

inline constexpr int kModelFormatVersion = 1;

namespace persist {

using nlohmann::json;

inline json vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vec(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline json tree_params(const TreeParams& p) {
  return {{"min_samples_split", p.min_samples_split},
          {"max_depth", p.max_depth},
          {"max_features", p.max_features},
          {"seed", p.seed}};
}

inline TreeParams tree_params(const json& j) {
  TreeParams p;
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.max_features = j.at("max_features").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

inline json forest_params(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"mtry", p.mtry},
          {"bootstrap", p.bootstrap},
          {"min_samples_split", p.min_samples_split},
          {"seed", p.seed}};
}

inline ForestParams forest_params(const json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<std::size_t>();
  p.mtry = j.at("mtry").get<std::size_t>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

inline json mlp_hyper(const MlpHyperparams& h) {
  return {{"epochs", h.epochs},
          {"batch_size", h.batch_size},
          {"learning_rate", h.learning_rate},
          {"seed", h.seed}};
}

inline MlpHyperparams mlp_hyper(const json& j) {
  MlpHyperparams h;
  h.epochs = j.at("epochs").get<std::size_t>();
  h.batch_size = j.at("batch_size").get<std::size_t>();
  h.learning_rate = j.at("learning_rate").get<double>();
  h.seed = j.at("seed").get<std::uint64_t>();
  return h;
}

inline json tree(const DecisionTreeModel& t) {
  std::vector<std::int32_t> feature;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<double> threshold;
  std::vector<double> impurity;
  std::vector<std::uint32_t> benign;
  std::vector<std::uint32_t> malignant;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    left.push_back(n.left);
    right.push_back(n.right);
    threshold.push_back(n.threshold);
    impurity.push_back(n.impurity);
    benign.push_back(n.counts[0]);
    malignant.push_back(n.counts[1]);
  }
  return {{"n_features", t.n_features}, {"params", tree_params(t.params)},
          {"feature", feature},         {"threshold", threshold},
          {"left", left},               {"right", right},
          {"impurity", impurity},       {"benign", benign},
          {"malignant", malignant}};
}

inline DecisionTreeModel tree(const json& j) {
  DecisionTreeModel t;
  t.n_features = j.at("n_features").get<std::size_t>();
  t.params = tree_params(j.at("params"));
  const auto feature = j.at("feature").get<std::vector<std::int32_t>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<std::int32_t>>();
  const auto right = j.at("right").get<std::vector<std::int32_t>>();
  const auto impurity = j.at("impurity").get<std::vector<double>>();
  const auto benign = j.at("benign").get<std::vector<std::uint32_t>>();
  const auto malignant = j.at("malignant").get<std::vector<std::uint32_t>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || impurity.size() != n ||
      benign.size() != n || malignant.size() != n || n == 0) {
    fail(ErrorKind::kSchema, "tree node arrays differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode node;
    node.feature = feature[i];
    node.threshold = threshold[i];
    node.left = left[i];
    node.right = right[i];
    node.impurity = impurity[i];
    node.counts = {benign[i], malignant[i]};
    if (!node.is_leaf() && (node.left <= static_cast<std::int32_t>(i) ||
                            node.right <= static_cast<std::int32_t>(i) ||
                            static_cast<std::size_t>(node.right) >= n ||
                            static_cast<std::size_t>(node.feature) >= t.n_features)) {
      fail(ErrorKind::kSchema, "tree node " + std::to_string(i) + " has invalid links");
    }
    t.nodes.push_back(node);
  }
  return t;
}

inline json mlp(const MlpModel& m) {
  json weights = json::array();
  for (const auto& w : m.weights) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    weights.push_back(flat);
  }
  json biases = json::array();
  for (const auto& b : m.biases) biases.push_back(vec(b));
  json norms = json::array();
  for (const auto& bn : m.norms) {
    norms.push_back({{"gamma", vec(bn.gamma)},
                     {"beta", vec(bn.beta)},
                     {"running_mean", vec(bn.running_mean)},
                     {"running_var", vec(bn.running_var)},
                     {"epsilon", bn.epsilon},
                     {"momentum", bn.momentum}});
  }
  return {{"layer_sizes", m.layer_sizes}, {"hyperparams", mlp_hyper(m.hyper)},
          {"weights", weights},           {"biases", biases},
          {"batch_norm", norms}};
}

inline MlpModel mlp(const json& j) {
  MlpModel m;
  m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  m.hyper = mlp_hyper(j.at("hyperparams"));
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  const auto& norms = j.at("batch_norm");
  const std::size_t layers = m.layer_sizes.size() < 2 ? 0 : m.layer_sizes.size() - 1;
  if (layers == 0 || weights.size() != layers || biases.size() != layers ||
      norms.size() != layers - 1) {
    fail(ErrorKind::kSchema, "MLP parameter arrays do not match layer_sizes");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const auto rows = static_cast<Eigen::Index>(m.layer_sizes[l + 1]);
    const auto cols = static_cast<Eigen::Index>(m.layer_sizes[l]);
    const auto flat = weights[l].get<std::vector<double>>();
    if (flat.size() != static_cast<std::size_t>(rows * cols)) {
      fail(ErrorKind::kSchema, "weight matrix " + std::to_string(l) + " has wrong size");
    }
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(vec(biases[l]));
    if (m.biases.back().size() != rows) fail(ErrorKind::kSchema, "bias vector has wrong size");
  }
  for (const auto& nj : norms) {
    BatchNorm bn;
    bn.gamma = vec(nj.at("gamma"));
    bn.beta = vec(nj.at("beta"));
    bn.running_mean = vec(nj.at("running_mean"));
    bn.running_var = vec(nj.at("running_var"));
    bn.epsilon = nj.at("epsilon").get<double>();
    bn.momentum = nj.at("momentum").get<double>();
    m.norms.push_back(std::move(bn));
  }
  return m;
}

inline json spec(const ModelSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"tree", tree_params(s.tree)},
          {"forest", forest_params(s.forest)},
          {"mlp", mlp_hyper(s.mlp)},
          {"hidden_layers", s.hidden_layers},
          {"scaling", std::string(to_string(s.scaling))}};
}

inline ModelSpec spec(const json& j) {
  ModelSpec s;
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  if (!kind) fail(ErrorKind::kSchema, "unknown model kind");
  s.kind = *kind;
  s.tree = tree_params(j.at("tree"));
  s.forest = forest_params(j.at("forest"));
  s.mlp = mlp_hyper(j.at("mlp"));
  s.hidden_layers = j.at("hidden_layers").get<std::vector<std::size_t>>();
  const auto scaling = j.at("scaling").get<std::string>();
  if (scaling == "raw") {
    s.scaling = InputScaling::kRaw;
  } else if (scaling == "standardize") {
    s.scaling = InputScaling::kStandardize;
  } else {
    fail(ErrorKind::kSchema, "unknown scaling '" + scaling + "'");
  }
  return s;
}

}  // namespace persist

inline nlohmann::json model_to_json(const TrainedModel& model) {
  using nlohmann::json;
  json doc;
  doc["format"] = "bcx-model";
  doc["version"] = kModelFormatVersion;
  doc["type"] = std::string(to_string(model.spec.kind));
  doc["seed"] = model.seed;
  doc["spec"] = persist::spec(model.spec);
  if (model.scaler) {
    doc["scaler"] = {{"means", persist::vec(model.scaler->means)},
                     {"stds", persist::vec(model.scaler->stds)},
                     {"fitted_on", model.scaler->fitted_on}};
  } else {
    doc["scaler"] = nullptr;
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DecisionTreeModel>) {
          doc["model"] = persist::tree(m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(persist::tree(t));
          doc["model"] = {{"n_features", m.n_features},
                          {"mtry", m.mtry},
                          {"params", persist::forest_params(m.params)},
                          {"trees", trees}};
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          doc["model"] = persist::mlp(m);
        } else {
          json members = json::array();
          for (const auto& member : m.members) members.push_back(persist::mlp(member));
          doc["model"] = {{"members", members}};
        }
      },
      model.model);
  return doc;
}

inline TrainedModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "bcx-model") {
      fail(ErrorKind::kSchema, "not a bcx model document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorKind::kSchema, "unsupported model format version " + std::to_string(version));
    }
    TrainedModel out;
    out.spec = persist::spec(doc.at("spec"));
    out.seed = doc.at("seed").get<std::uint64_t>();
    if (!doc.at("scaler").is_null()) {
      StandardizationStats stats;
      stats.means = persist::vec(doc["scaler"].at("means"));
      stats.stds = persist::vec(doc["scaler"].at("stds"));
      stats.fitted_on = doc["scaler"].at("fitted_on").get<std::size_t>();
      out.scaler = std::move(stats);
    }
    const auto& m = doc.at("model");
    switch (out.spec.kind) {
      case ModelKind::kTree:
        out.model = persist::tree(m);
        break;
      case ModelKind::kForest: {
        ForestModel forest;
        forest.n_features = m.at("n_features").get<std::size_t>();
        forest.mtry = m.at("mtry").get<std::size_t>();
        forest.params = persist::forest_params(m.at("params"));
        for (const auto& t : m.at("trees")) forest.trees.push_back(persist::tree(t));
        out.model = std::move(forest);
        break;
      }
      case ModelKind::kMlp:
        out.model = persist::mlp(m);
        break;
      case ModelKind::kEnsemble: {
        EnsembleModel ens;
        const auto& members = m.at("members");
        if (members.size() != 3) fail(ErrorKind::kSchema, "ensemble must have 3 members");
        for (std::size_t i = 0; i < 3; ++i) ens.members[i] = persist::mlp(members[i]);
        out.model = std::move(ens);
        break;
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("malformed model document: ") + e.what());
  }
}

inline void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out << model_to_json(model).dump() << '\n';
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, "'" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace bcx
