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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bcx/bundle.hpp"
#include "bcx/dataset.hpp"
#include "bcx/ice.hpp"
#include "bcx/metrics.hpp"
#include "bcx/model.hpp"
#include "bcx/pca.hpp"
#include "bcx/persistence.hpp"
#include "bcx/report.hpp"
#include "bcx/selection.hpp"
#include "bcx/shapley.hpp"
#include "bcx/surrogate.hpp"
#include "bcx/svg.hpp"

namespace bcx {

/// Everything a run depends on.
struct RunConfig {
  std::uint64_t seed = 42;
  std::string dataset;
  std::string out_dir;
  std::size_t folds = 10;
  double learning_rate = 0.05;
  std::size_t n_trees = 500;
  std::size_t mtry = 0;
  std::size_t epochs = 400;
  std::size_t batch_size = 64;
  std::size_t shapley_permutations = 128;
  std::size_t background_size = 100;
  std::size_t repetitions = 100;
  std::size_t k_gs = 5;
  std::size_t k_sv = 7;
  std::size_t ice_grid = kIceGridPoints;
  bool save_models = true;

  ModelSpec spec_for(ModelKind kind) const {
    ModelSpec spec = ModelSpec::defaults(kind);
    spec.forest.n_trees = n_trees;
    spec.forest.mtry = mtry;
    spec.mlp.epochs = epochs;
    spec.mlp.batch_size = batch_size;
    spec.mlp.learning_rate = learning_rate;
    return spec;
  }

  ShapleyEstimator shapley() const {
    ShapleyEstimator est;
    est.permutations = shapley_permutations;
    est.background_size = background_size;
    est.seed = derive_seed(seed, 0x53484150ULL);
    return est;
  }

  /// Seed for a model trained on the full dataset by stage `tag`.
  std::uint64_t full_data_seed(std::string_view tag) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    return derive_seed(seed, h);
  }

  /// Run parameters for the manifest; paths are left out so that runs in
  /// different directories produce identical files.
  OrderedJson to_json() const {
    return {{"seed", seed},
            {"folds", folds},
            {"learning_rate", learning_rate},
            {"n_trees", n_trees},
            {"mtry", mtry},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"shapley_permutations", shapley_permutations},
            {"background_size", background_size},
            {"repetitions", repetitions},
            {"k_gs", k_gs},
            {"k_sv", k_sv},
            {"ice_grid", ice_grid}};
  }
};

inline std::string model_tag(ModelKind kind) { return std::string(to_string(kind)); }

inline TrainedModel train_full(const RunConfig& cfg, const Dataset& data, ModelKind kind,
                               std::string_view stage) {
  return train_model(cfg.spec_for(kind), data,
                     cfg.full_data_seed(std::string(stage) + "/" + model_tag(kind)));
}

inline void maybe_save_model(const RunConfig& cfg, ReportBundle& bundle, const TrainedModel& model,
                             const std::string& name, const std::string& stage) {
  if (cfg.save_models) bundle.write(name, model_to_json(model).dump() + "\n", stage);
}

// ---------------------------------------------------------------------------
// Stages

inline MetricsReport stage_cv(const RunConfig& cfg, const Dataset& data, ModelKind kind,
                              ReportBundle& bundle) {
  const auto report = cross_validate(cfg.spec_for(kind), data, cfg.folds, cfg.seed);
  const auto tag = model_tag(kind);
  OrderedJson doc = {{"model", tag}, {"folds", cfg.folds}, {"seed", cfg.seed},
                     {"metrics", metrics_to_json(report)}};
  bundle.write("metrics_" + tag + ".json", doc.dump(2) + "\n", "cv");
  bundle.write("metrics_" + tag + ".csv", metrics_csv_header() + metrics_csv_row(tag, report), "cv");
  return report;
}

inline std::vector<IceResult> stage_ice(const RunConfig& cfg, const Dataset& data, ModelKind kind,
                                        const std::vector<std::string>& features,
                                        ReportBundle& bundle) {
  std::vector<std::size_t> indices;
  for (const auto& name : features) {
    const auto idx = find_feature(data.descriptors, name);
    if (!idx) fail(ErrorKind::kUsage, "unknown feature '" + name + "'");
    indices.push_back(*idx);
  }
  const auto model = train_full(cfg, data, kind, "ice");
  const auto tag = model_tag(kind);
  maybe_save_model(cfg, bundle, model, "model_ice_" + tag + ".json", "ice");
  std::vector<IceResult> out;
  for (std::size_t f = 0; f < indices.size(); ++f) {
    auto ice = ice_curves(model, data, indices[f], cfg.ice_grid);
    const std::string stem = "ice_" + tag + "_" + features[f];
    bundle.write(stem + ".csv", ice_to_csv(ice, data), "ice");
    bundle.write(stem + ".svg",
                 svg::ice_plot(ice, features[f], "ICE curves of " + tag + " for " + features[f]),
                 "ice");
    out.push_back(std::move(ice));
  }
  return out;
}

struct SurrogateStageResult {
  SurrogateReport in_sample;
  SurrogateCvReport held_out;
  TrainedModel bbm;
};

inline SurrogateStageResult stage_surrogate(const RunConfig& cfg, const Dataset& data,
                                            ModelKind kind, ReportBundle& bundle) {
  const auto tag = model_tag(kind);
  SurrogateStageResult out{.in_sample = {}, .held_out = {}, .bbm = train_full(cfg, data, kind, "surrogate")};
  out.in_sample = fit_global_surrogate(out.bbm, data, tag);
  out.held_out = cross_validated_surrogate(cfg.spec_for(kind), data, cfg.folds, cfg.seed);
  bundle.write("surrogate_" + tag + ".json",
               surrogate_to_json(out.in_sample, out.held_out, data).dump(2) + "\n", "surrogate");
  bundle.write("surrogate_" + tag + "_tree.txt", tree_to_text(out.in_sample.surrogate, data.descriptors),
               "surrogate");
  bundle.write("surrogate_" + tag + "_tree.svg", svg::tree_plot(out.in_sample.surrogate, data.descriptors),
               "surrogate");
  return out;
}

inline PcaProjection stage_pca(const RunConfig& cfg, const Dataset& data, ModelKind kind,
                               ReportBundle& bundle) {
  const auto tag = model_tag(kind);
  const auto bbm = train_full(cfg, data, kind, "surrogate");
  const auto surrogate = fit_global_surrogate(bbm, data, tag);
  const auto standardized = apply_standardizer(data, fit_standardizer(data));
  auto pca = pca_fit_project(standardized.features, 2);
  const Vector sp = tree_predict_proba(surrogate.surrogate, data.features);
  std::vector<Label> surrogate_labels(data.n_samples());
  for (std::size_t i = 0; i < surrogate_labels.size(); ++i) {
    surrogate_labels[i] = label_from_probability(sp[static_cast<Eigen::Index>(i)]);
  }
  bundle.write("pca_" + tag + ".csv", pca_to_csv(pca, data, surrogate.bbm_labels, surrogate_labels),
               "pca");
  bundle.write("pca_" + tag + ".svg",
               svg::pca_pair_plot(pca, surrogate_labels, "Decision-tree surrogate",
                                  surrogate.bbm_labels, tag + " predictions"),
               "pca");
  return pca;
}

inline ShapleySummary stage_shapley(const RunConfig& cfg, const Dataset& data, ModelKind kind,
                                    ReportBundle& bundle) {
  const auto tag = model_tag(kind);
  const auto model = train_full(cfg, data, kind, "shapley");
  maybe_save_model(cfg, bundle, model, "model_shapley_" + tag + ".json", "shapley");
  auto summary = shapley_summary(model, data, cfg.shapley());
  bundle.write("shapley_" + tag + ".csv", shapley_to_csv(summary, data), "shapley");
  bundle.write("shapley_" + tag + "_ranking.csv", shapley_ranking_csv(summary, data), "shapley");
  bundle.write("shapley_" + tag + ".svg", svg::shapley_summary_plot(summary, data.descriptors),
               "shapley");
  return summary;
}

struct SelectStageResult {
  ImportanceAggregate aggregate;
  SelectionResult selection;
};

inline SelectStageResult stage_select(const RunConfig& cfg, const Dataset& data,
                                      ImportanceMethod method, ModelKind kind, std::size_t k,
                                      ReportBundle& bundle, const std::string& table_name = {}) {
  const auto tag = model_tag(kind);
  const std::string mtag = method == ImportanceMethod::kGlobalSurrogate ? "gs" : "sv";
  SelectStageResult out;
  out.aggregate = repeated_importance(method, cfg.spec_for(kind), data, cfg.repetitions,
                                      derive_seed(cfg.seed, 0x524550ULL), cfg.shapley());
  bundle.write("importance_" + mtag + "_" + tag + ".csv", aggregate_to_csv(out.aggregate, data),
               "select");
  const auto selected = select_top_k(out.aggregate, k);
  out.selection = evaluate_selection(cfg.spec_for(kind), data, selected, cfg.seed, cfg.folds);
  const auto doc = selection_to_json(out.selection, data, tag, to_string(method));
  const std::string stem = table_name.empty() ? "selection_" + mtag + "_" + tag : table_name;
  bundle.write(stem + ".json", doc.dump(2) + "\n", "select");
  bundle.write(stem + ".csv",
               metrics_csv_header() +
                   metrics_csv_row("all_features_" + std::to_string(data.n_features()),
                                   out.selection.baseline) +
                   metrics_csv_row("selected_" + std::to_string(k), out.selection.with_selection),
               "select");
  return out;
}

/// Every stage in order with the run configuration; the first
/// failure stops the run and is recorded in the bundle.
inline bool reproduce(const RunConfig& cfg, const Dataset& data, ReportBundle& bundle) {
  const auto run = [&](const std::string& name, auto&& body) {
    if (!bundle.all_ok()) return;
    try {
      body();
      bundle.record_stage(name, true);
    } catch (const std::exception& e) {
      bundle.record_stage(name, false, e.what());
    }
  };
  run("table1", [&] {
    OrderedJson doc = {{"folds", cfg.folds}, {"seed", cfg.seed}, {"rows", OrderedJson::object()}};
    std::string csv = metrics_csv_header();
    for (const auto kind : {ModelKind::kForest, ModelKind::kMlp, ModelKind::kEnsemble}) {
      const auto report = cross_validate(cfg.spec_for(kind), data, cfg.folds, cfg.seed);
      doc["rows"][model_tag(kind)] = metrics_to_json(report);
      csv += metrics_csv_row(model_tag(kind), report);
    }
    bundle.write("table1.json", doc.dump(2) + "\n", "table1");
    bundle.write("table1.csv", csv, "table1");
  });
  run("ice", [&] { stage_ice(cfg, data, ModelKind::kEnsemble, {"area_mean", "perimeter_mean"}, bundle); });
  run("surrogate", [&] { stage_surrogate(cfg, data, ModelKind::kForest, bundle); });
  run("pca", [&] { stage_pca(cfg, data, ModelKind::kForest, bundle); });
  run("shapley", [&] { stage_shapley(cfg, data, ModelKind::kMlp, bundle); });
  run("table2", [&] {
    stage_select(cfg, data, ImportanceMethod::kGlobalSurrogate, ModelKind::kForest, cfg.k_gs, bundle,
                 "table2");
  });
  run("table3", [&] {
    stage_select(cfg, data, ImportanceMethod::kShapley, ModelKind::kMlp, cfg.k_sv, bundle, "table3");
  });
  bundle.write_manifest(cfg.to_json());
  return bundle.all_ok();
}

}  // namespace bcx
