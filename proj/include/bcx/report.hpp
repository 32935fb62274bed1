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
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bcx/dataset.hpp"
#include "bcx/ice.hpp"
#include "bcx/metrics.hpp"
#include "bcx/pca.hpp"
#include "bcx/selection.hpp"
#include "bcx/shapley.hpp"
#include "bcx/surrogate.hpp"
#include "bcx/tree.hpp"

namespace bcx {

// Text renderings of every result type. All numbers go through fmt_num so
// the same inputs always produce the same bytes.

using OrderedJson = nlohmann::ordered_json;

inline std::string fmt_num(double v, int precision = 17) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

inline std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline OrderedJson confusion_to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

/// acc/se/sp as percentages (table convention) plus the raw fractions.
inline OrderedJson metrics_to_json(const MetricsReport& r) {
  OrderedJson folds = OrderedJson::array();
  for (const auto& f : r.per_fold) {
    folds.push_back({{"fold", f.fold},
                     {"acc", f.acc},
                     {"se", f.se},
                     {"sp", f.sp},
                     {"auc_score", f.auc},
                     {"confusion", confusion_to_json(f.cm)}});
  }
  return {{"acc", 100.0 * r.acc},
          {"se", 100.0 * r.se},
          {"sp", 100.0 * r.sp},
          {"auc", r.auc},
          {"auc_score", r.auc_score},
          {"fraction", {{"acc", r.acc}, {"se", r.se}, {"sp", r.sp}}},
          {"n", r.n},
          {"confusion", confusion_to_json(r.cm)},
          {"per_fold", folds}};
}

inline std::string metrics_csv_header() { return "model,acc,se,sp,auc,auc_score,n\n"; }

/// One table row: percentages to two decimals, AUC to three.
inline std::string metrics_csv_row(std::string_view name, const MetricsReport& r) {
  std::ostringstream out;
  out << name << ',' << fmt_fixed(100.0 * r.acc, 2) << ',' << fmt_fixed(100.0 * r.se, 2) << ','
      << fmt_fixed(100.0 * r.sp, 2) << ',' << fmt_fixed(r.auc, 3) << ','
      << fmt_fixed(r.auc_score, 3) << ',' << r.n << '\n';
  return out.str();
}

/// First row is the grid, then one row per sample curve, then the PDP.
inline std::string ice_to_csv(const IceResult& ice, const Dataset& dataset) {
  std::ostringstream out;
  out << "row,sample";
  for (Eigen::Index j = 0; j < ice.grid.size(); ++j) out << ",g" << j;
  out << "\ngrid," << dataset.descriptors[ice.feature_index].name();
  for (Eigen::Index j = 0; j < ice.grid.size(); ++j) out << ',' << fmt_num(ice.grid[j]);
  out << '\n';
  for (Eigen::Index i = 0; i < ice.curves.rows(); ++i) {
    out << "curve," << dataset.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < ice.curves.cols(); ++j) out << ',' << fmt_num(ice.curves(i, j));
    out << '\n';
  }
  out << "pdp,";
  for (Eigen::Index j = 0; j < ice.pdp.size(); ++j) out << ',' << fmt_num(ice.pdp[j]);
  out << '\n';
  return out.str();
}

inline std::string shapley_to_csv(const ShapleySummary& s, const Dataset& dataset) {
  std::ostringstream out;
  out << "sample,feature,value,attribution\n";
  for (Eigen::Index i = 0; i < s.attributions.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.attributions.cols(); ++j) {
      out << dataset.ids[static_cast<std::size_t>(i)] << ','
          << dataset.descriptors[static_cast<std::size_t>(j)].name() << ','
          << fmt_num(s.feature_values(i, j)) << ',' << fmt_num(s.attributions(i, j)) << '\n';
    }
  }
  return out.str();
}

inline std::string shapley_ranking_csv(const ShapleySummary& s, const Dataset& dataset) {
  std::ostringstream out;
  out << "rank,feature,mean_abs_attribution\n";
  for (std::size_t r = 0; r < s.ranking.size(); ++r) {
    out << r + 1 << ',' << dataset.descriptors[s.ranking[r]].name() << ','
        << fmt_num(s.mean_abs[s.ranking[r]]) << '\n';
  }
  return out.str();
}

/// feature,mean,std,rank in feature order.
inline std::string aggregate_to_csv(const ImportanceAggregate& agg, const Dataset& dataset) {
  std::vector<std::size_t> rank_of(agg.ranking.size());
  for (std::size_t r = 0; r < agg.ranking.size(); ++r) rank_of[agg.ranking[r]] = r + 1;
  std::ostringstream out;
  out << "feature,mean,std,rank\n";
  for (std::size_t j = 0; j < agg.mean.size(); ++j) {
    out << dataset.descriptors[j].name() << ',' << fmt_num(agg.mean[j]) << ','
        << fmt_num(agg.std[j]) << ',' << rank_of[j] << '\n';
  }
  return out.str();
}

inline OrderedJson selection_to_json(const SelectionResult& s, const Dataset& dataset,
                                     std::string_view model, std::string_view method) {
  OrderedJson names = OrderedJson::array();
  for (const auto j : s.selected) names.push_back(dataset.descriptors[j].name());
  return {{"model", model},
          {"method", method},
          {"selected", names},
          {"selected_indices", s.selected},
          {"baseline", metrics_to_json(s.baseline)},
          {"selected_metrics", metrics_to_json(s.with_selection)},
          {"delta", {{"acc", 100.0 * s.delta_acc()}, {"auc", s.delta_auc()}}}};
}

/// Indented text dump, one node per line.
inline std::string tree_to_text(const DecisionTreeModel& tree,
                                std::span<const FeatureDescriptor> descriptors) {
  std::ostringstream out;
  struct Item {
    std::size_t node;
    std::size_t depth;
    std::string prefix;
  };
  std::vector<Item> stack{{0, 0, ""}};
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    const auto& n = tree.nodes[item.node];
    out << std::string(2 * item.depth, ' ') << item.prefix;
    if (n.is_leaf()) {
      out << "leaf " << (label_from_probability(n.malignant_fraction()) == Label::kMalignant
                             ? "malignant"
                             : "benign");
    } else {
      out << descriptors[static_cast<std::size_t>(n.feature)].name() << " <= "
          << fmt_num(n.threshold, 6);
    }
    out << " [benign=" << n.counts[0] << ", malignant=" << n.counts[1]
        << ", gini=" << fmt_fixed(n.impurity, 4) << "]\n";
    if (!n.is_leaf()) {
      stack.push_back({static_cast<std::size_t>(n.right), item.depth + 1, "else: "});
      stack.push_back({static_cast<std::size_t>(n.left), item.depth + 1, "then: "});
    }
  }
  return out.str();
}

inline OrderedJson surrogate_to_json(const SurrogateReport& in_sample, const SurrogateCvReport& cv,
                                     const Dataset& dataset) {
  const auto& root = in_sample.surrogate.root();
  OrderedJson importances = OrderedJson::object();
  for (std::size_t j = 0; j < in_sample.importances.size(); ++j) {
    importances[dataset.descriptors[j].name()] = in_sample.importances[j];
  }
  OrderedJson root_json = nullptr;
  if (!root.is_leaf()) {
    root_json = {{"feature", dataset.descriptors[static_cast<std::size_t>(root.feature)].name()},
                 {"threshold", root.threshold}};
  }
  return {{"bbm", in_sample.bbm},
          {"held_out",
           {{"metrics", metrics_to_json(cv.surrogate_vs_truth)},
            {"r2", cv.r2},
            {"agreement", cv.agreement}}},
          {"in_sample",
           {{"metrics", metrics_to_json(in_sample.surrogate_vs_truth)},
            {"r2", in_sample.r2},
            {"agreement", in_sample.agreement}}},
          {"root", root_json},
          {"depth", in_sample.surrogate.depth()},
          {"leaves", in_sample.surrogate.leaf_count()},
          {"importances", importances}};
}

inline std::string pca_to_csv(const PcaProjection& pca, const Dataset& dataset,
                              std::span<const Label> bbm, std::span<const Label> surrogate) {
  std::ostringstream out;
  out << "sample,pc1,pc2,truth,bbm_label,surrogate_label\n";
  const auto name = [](Label l) { return l == Label::kMalignant ? "M" : "B"; };
  for (Eigen::Index i = 0; i < pca.coordinates.rows(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    out << dataset.ids[s] << ',' << fmt_num(pca.coordinates(i, 0)) << ','
        << fmt_num(pca.coordinates(i, 1)) << ',' << name(dataset.labels[s]) << ','
        << name(bbm[s]) << ',' << name(surrogate[s]) << '\n';
  }
  return out.str();
}

}  // namespace bcx
