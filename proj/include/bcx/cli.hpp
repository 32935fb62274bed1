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

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcx/pipeline.hpp"

namespace bcx {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFile = 3;

/// Environment variable naming the default dataset path.
inline constexpr const char* kDatasetEnv = "BCX_WDBC";

inline std::string default_dataset_path() {
  if (const char* env = std::getenv(kDatasetEnv); env != nullptr && *env != '\0') return env;
  return "data/wdbc.data";
}

inline std::string default_out_dir(std::uint64_t seed) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return "runs/" + std::string(buf) + "-seed" + std::to_string(seed);
}

/// Parses `args` (without the program name), runs the requested stage and
/// returns the process exit status.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interpretable breast-cancer diagnosis toolkit", "bcx"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_config("--config", "", "Key-value config file; keys are long option names");

  RunConfig cfg;
  cfg.dataset = default_dataset_path();
  bool no_save = false;
  app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  app.add_option("--data", cfg.dataset, "WDBC CSV file (default: $BCX_WDBC or data/wdbc.data)");
  app.add_option("--out", cfg.out_dir, "Output directory (default: runs/<timestamp>-seed<seed>)");
  app.add_option("--folds", cfg.folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 100));
  app.add_option("--n-trees", cfg.n_trees, "Trees per forest")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--mtry", cfg.mtry, "Features per split (0: floor(sqrt(d)))")->capture_default_str();
  app.add_option("--epochs", cfg.epochs, "MLP training epochs")->capture_default_str();
  app.add_option("--batch-size", cfg.batch_size, "MLP batch size")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  app.add_option("--lr", cfg.learning_rate, "MLP learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--permutations", cfg.shapley_permutations, "Shapley permutations per sample")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--background", cfg.background_size, "Shapley background rows")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--repetitions", cfg.repetitions, "Importance repetitions")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--grid", cfg.ice_grid, "ICE grid points")->capture_default_str()->check(CLI::Range(2, 100000));
  app.add_flag("--no-save-models", no_save, "Do not write model JSON files");

  const std::vector<std::string> model_names{"rf", "nn", "enn", "tree"};
  std::string model = "rf";
  std::vector<std::string> features{"area_mean", "perimeter_mean"};
  std::string method = "gs";
  std::size_t k = 0;

  auto* cv = app.add_subcommand("cv", "Cross-validated metrics for one model");
  cv->add_option("--model", model, "rf | nn | enn | tree")->check(CLI::IsMember(model_names))->capture_default_str();

  auto* ice = app.add_subcommand("ice", "ICE curves and partial dependence");
  std::string ice_model = "enn";
  ice->add_option("--model", ice_model, "rf | nn | enn | tree")->check(CLI::IsMember(model_names))->capture_default_str();
  ice->add_option("--feature", features, "Feature name(s), e.g. area_mean")->capture_default_str();

  auto* sur = app.add_subcommand("surrogate", "Decision-tree global surrogate");
  std::string sur_model = "rf";
  sur->add_option("--model", sur_model, "rf | nn | enn")->check(CLI::IsMember(model_names))->capture_default_str();

  auto* shap = app.add_subcommand("shapley", "Shapley value summary");
  std::string shap_model = "nn";
  shap->add_option("--model", shap_model, "rf | nn | enn | tree")->check(CLI::IsMember(model_names))->capture_default_str();

  auto* pca = app.add_subcommand("pca", "PCA scatter of black box vs surrogate predictions");
  std::string pca_model = "rf";
  pca->add_option("--model", pca_model, "rf | nn | enn")->check(CLI::IsMember(model_names))->capture_default_str();

  auto* sel = app.add_subcommand("select", "Repeated importance, top-k selection and re-evaluation");
  std::string sel_model;
  sel->add_option("--method", method, "gs | sv")->check(CLI::IsMember({"gs", "sv"}))->capture_default_str();
  sel->add_option("--model", sel_model, "rf | nn | enn (default: rf for gs, nn for sv)")
      ->check(CLI::IsMember(model_names));
  sel->add_option("--k", k, "Features to keep (default: 5 for gs, 7 for sv)")->check(CLI::PositiveNumber);

  auto* rep = app.add_subcommand("reproduce", "Run every stage with the default configuration");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  cfg.save_models = !no_save;
  if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir(cfg.seed);

  Dataset data;
  try {
    data = load_wdbc(cfg.dataset);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.kind() == ErrorKind::kIo ? kExitFile : kExitStageFailed;
  }

  ReportBundle bundle(cfg.out_dir);
  const auto stage = [&](const std::string& name, auto&& body) {
    try {
      body();
      bundle.record_stage(name, true);
    } catch (const Error& e) {
      bundle.record_stage(name, false, e.what());
      err << "stage '" << name << "' failed: " << e.what() << "\n";
      if (e.kind() == ErrorKind::kUsage) return;
    } catch (const std::exception& e) {
      bundle.record_stage(name, false, e.what());
      err << "stage '" << name << "' failed: " << e.what() << "\n";
    }
  };

  const auto kind_of = [](const std::string& name) { return *parse_model_kind(name); };

  if (cv->parsed()) {
    stage("cv", [&] {
      const auto r = stage_cv(cfg, data, kind_of(model), bundle);
      out << metrics_csv_header() << metrics_csv_row(model, r);
    });
  } else if (ice->parsed()) {
    for (const auto& f : features) {
      if (!find_feature(data.descriptors, f)) {
        err << "usage error: unknown feature '" << f << "'\n";
        return kExitUsage;
      }
    }
    stage("ice", [&] { stage_ice(cfg, data, kind_of(ice_model), features, bundle); });
  } else if (sur->parsed()) {
    stage("surrogate", [&] {
      const auto r = stage_surrogate(cfg, data, kind_of(sur_model), bundle);
      out << "held-out acc " << fmt_fixed(100 * r.held_out.surrogate_vs_truth.acc, 2) << "% r2 "
          << fmt_fixed(r.held_out.r2, 3) << "\n";
    });
  } else if (shap->parsed()) {
    stage("shapley", [&] {
      const auto s = stage_shapley(cfg, data, kind_of(shap_model), bundle);
      for (std::size_t r = 0; r < std::min<std::size_t>(10, s.ranking.size()); ++r) {
        out << r + 1 << ". " << data.descriptors[s.ranking[r]].name() << "\n";
      }
    });
  } else if (pca->parsed()) {
    stage("pca", [&] { stage_pca(cfg, data, kind_of(pca_model), bundle); });
  } else if (sel->parsed()) {
    const auto m = *parse_importance_method(method);
    const auto kind = sel_model.empty()
                          ? (m == ImportanceMethod::kGlobalSurrogate ? ModelKind::kForest : ModelKind::kMlp)
                          : kind_of(sel_model);
    const std::size_t keep = k != 0 ? k : (m == ImportanceMethod::kGlobalSurrogate ? cfg.k_gs : cfg.k_sv);
    if (keep > data.n_features()) {
      err << "usage error: --k exceeds the number of features\n";
      return kExitUsage;
    }
    stage("select", [&] {
      const auto r = stage_select(cfg, data, m, kind, keep, bundle);
      out << metrics_csv_header()
          << metrics_csv_row("all_features", r.selection.baseline)
          << metrics_csv_row("selected", r.selection.with_selection);
    });
  } else if (rep->parsed()) {
    reproduce(cfg, data, bundle);
    for (const auto& s : bundle.stages()) {
      out << (s.ok ? "ok     " : "FAILED ") << s.name << (s.ok ? "" : ": " + s.message) << "\n";
    }
  }
  if (!rep->parsed()) bundle.write_manifest(cfg.to_json());
  out << "wrote " << bundle.entries().size() << " files to " << bundle.dir().string() << "\n";
  return bundle.all_ok() ? kExitOk : kExitStageFailed;
}

}  // namespace bcx
