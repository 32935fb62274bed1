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

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bcx/error.hpp"
#include "bcx/random.hpp"

namespace bcx {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Label : std::uint8_t { kBenign = 0, kMalignant = 1 };

inline constexpr double to_target(Label label) {
  return label == Label::kMalignant ? 1.0 : 0.0;
}

/// Hard label from a malignancy probability; ties go to malignant.
inline constexpr Label label_from_probability(double p) {
  return p >= 0.5 ? Label::kMalignant : Label::kBenign;
}

enum class BaseFeature : std::uint8_t {
  kRadius,
  kTexture,
  kPerimeter,
  kArea,
  kSmoothness,
  kCompactness,
  kConcavity,
  kConcavePoints,
  kSymmetry,
  kFractalDimension,
};

enum class Statistic : std::uint8_t { kMean, kSe, kWorst };

inline constexpr std::array<std::string_view, 10> kBaseFeatureNames = {
    "radius",     "texture",   "perimeter",      "area",     "smoothness",
    "compactness", "concavity", "concave_points", "symmetry", "fractal_dimension"};

inline constexpr std::array<std::string_view, 3> kStatisticNames = {"mean", "se", "worst"};

struct FeatureDescriptor {
  std::size_t index = 0;
  BaseFeature base = BaseFeature::kRadius;
  Statistic statistic = Statistic::kMean;

  std::string name() const {
    return std::string(kBaseFeatureNames[static_cast<std::size_t>(base)]) + "_" +
           std::string(kStatisticNames[static_cast<std::size_t>(statistic)]);
  }

  /// Radius, perimeter or area: the nucleus-size family.
  bool is_size_feature() const {
    return base == BaseFeature::kRadius || base == BaseFeature::kPerimeter ||
           base == BaseFeature::kArea;
  }

  bool operator==(const FeatureDescriptor&) const = default;
};

/// The 30 WDBC descriptors in UCI file order: ten mean values, ten standard
/// errors, ten worst values.
inline std::vector<FeatureDescriptor> wdbc_descriptors() {
  std::vector<FeatureDescriptor> out;
  out.reserve(30);
  for (std::size_t block = 0; block < 3; ++block) {
    for (std::size_t pos = 0; pos < 10; ++pos) {
      out.push_back({block * 10 + pos, static_cast<BaseFeature>(pos),
                     static_cast<Statistic>(block)});
    }
  }
  return out;
}

/// Feature index for a snake_case name such as "area_worst".
inline std::optional<std::size_t> find_feature(std::span<const FeatureDescriptor> descriptors,
                                               std::string_view name) {
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (descriptors[i].name() == name) return i;
  }
  return std::nullopt;
}

struct Dataset {
  std::vector<std::string> ids;
  Matrix features;
  std::vector<Label> labels;
  std::vector<FeatureDescriptor> descriptors;

  std::size_t n_samples() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }

  std::size_t count(Label label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
  }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> names;
    names.reserve(descriptors.size());
    for (const auto& d : descriptors) names.push_back(d.name());
    return names;
  }

  /// Throws a shape error if row/column bookkeeping disagrees.
  void validate() const {
    if (ids.size() != n_samples() || labels.size() != n_samples()) {
      fail(ErrorKind::kShape, "dataset has " + std::to_string(n_samples()) + " rows but " +
                                  std::to_string(ids.size()) + " ids and " +
                                  std::to_string(labels.size()) + " labels");
    }
    if (descriptors.size() != n_features()) {
      fail(ErrorKind::kShape, "dataset has " + std::to_string(n_features()) +
                                  " feature columns but " +
                                  std::to_string(descriptors.size()) + " descriptors");
    }
  }

  bool operator==(const Dataset& other) const {
    return ids == other.ids && labels == other.labels && descriptors == other.descriptors &&
           features.rows() == other.features.rows() &&
           features.cols() == other.features.cols() && features == other.features;
  }
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
      f.remove_suffix(1);
    }
  }
  return fields;
}

inline std::optional<double> parse_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    return std::nullopt;
  }
  return value;
}

inline bool is_diagnosis(std::string_view token) { return token == "M" || token == "B"; }

}  // namespace detail

/// Throws a degenerate-data error naming the first constant column among
/// `rows` (all rows when empty).
inline void require_non_constant(const Dataset& dataset, std::span<const std::size_t> rows = {}) {
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    bool constant = true;
    const double first = dataset.features(rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0]),
                                          static_cast<Eigen::Index>(j));
    const std::size_t n = rows.empty() ? dataset.n_samples() : rows.size();
    for (std::size_t r = 1; r < n && constant; ++r) {
      const auto row = static_cast<Eigen::Index>(rows.empty() ? r : rows[r]);
      constant = dataset.features(row, static_cast<Eigen::Index>(j)) == first;
    }
    if (constant) {
      fail(ErrorKind::kDegenerateData, "feature '" + dataset.descriptors[j].name() +
                                           "' is constant");
    }
  }
}

/// Parses WDBC CSV text: ID, diagnosis (M/B), 30 features, optional header.
inline Dataset parse_wdbc(std::istream& in, std::string_view source = "<stream>") {
  const auto descriptors = wdbc_descriptors();
  const std::size_t expected_columns = 2 + descriptors.size();
  const std::string where(source);

  std::vector<std::string> ids;
  std::vector<Label> labels;
  std::vector<double> values;

  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_csv_line(line);
    if (!seen_content) {
      seen_content = true;
      const bool first_numeric = detail::parse_double(fields[0]).has_value();
      const bool second_code = fields.size() > 1 && detail::is_diagnosis(fields[1]);
      if (!first_numeric && !second_code) continue;  // header row
    }
    if (fields.size() != expected_columns) {
      fail(ErrorKind::kParse, where + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected_columns) + " columns, found " +
                                  std::to_string(fields.size()));
    }
    if (fields[1] == "M") {
      labels.push_back(Label::kMalignant);
    } else if (fields[1] == "B") {
      labels.push_back(Label::kBenign);
    } else {
      fail(ErrorKind::kSchema, where + ":" + std::to_string(line_no) +
                                   ": unknown diagnosis code '" + std::string(fields[1]) + "'");
    }
    ids.emplace_back(fields[0]);
    for (std::size_t j = 2; j < fields.size(); ++j) {
      const auto v = detail::parse_double(fields[j]);
      if (!v || !std::isfinite(*v)) {
        fail(ErrorKind::kValue, where + ":" + std::to_string(line_no) + ": feature '" +
                                    descriptors[j - 2].name() + "' has invalid value '" +
                                    std::string(fields[j]) + "'");
      }
      values.push_back(*v);
    }
  }
  if (ids.empty()) fail(ErrorKind::kParse, where + ": no data rows");

  Dataset out;
  out.ids = std::move(ids);
  out.labels = std::move(labels);
  out.descriptors = descriptors;
  out.features = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(out.labels.size()),
                                    static_cast<Eigen::Index>(descriptors.size()));
  out.validate();
  if (out.n_samples() > 1) require_non_constant(out);
  return out;
}

inline Dataset load_wdbc(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  return parse_wdbc(in, path);
}

// ---------------------------------------------------------------------------
// Standardization

struct StandardizationStats {
  Vector means;
  Vector stds;
  std::size_t fitted_on = 0;

  double transform(std::size_t feature, double x) const {
    return (x - means[static_cast<Eigen::Index>(feature)]) /
           stds[static_cast<Eigen::Index>(feature)];
  }

  Matrix transform(const Matrix& x) const {
    if (x.cols() != means.size()) {
      fail(ErrorKind::kShape, "standardizer fitted on " + std::to_string(means.size()) +
                                  " features, got " + std::to_string(x.cols()));
    }
    return ((x.rowwise() - means.transpose()).array().rowwise() / stds.transpose().array())
        .matrix();
  }

  Matrix inverse(const Matrix& z) const {
    return ((z.array().rowwise() * stds.transpose().array()).matrix().rowwise() +
            means.transpose());
  }
};

/// Population mean/std over `rows` only.
inline StandardizationStats fit_standardizer(const Dataset& dataset,
                                             std::span<const std::size_t> rows) {
  if (rows.empty()) fail(ErrorKind::kDegenerateData, "cannot fit standardizer on zero rows");
  const auto d = static_cast<Eigen::Index>(dataset.n_features());
  StandardizationStats stats;
  stats.means = Vector::Zero(d);
  stats.stds = Vector::Zero(d);
  stats.fitted_on = rows.size();
  const double n = static_cast<double>(rows.size());
  for (const auto r : rows) stats.means += dataset.features.row(static_cast<Eigen::Index>(r)).transpose();
  stats.means /= n;
  for (const auto r : rows) {
    const Vector diff = dataset.features.row(static_cast<Eigen::Index>(r)).transpose() - stats.means;
    stats.stds += diff.cwiseProduct(diff);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    stats.stds[j] = std::sqrt(stats.stds[j] / n);
    if (!(stats.stds[j] > 0.0)) {
      fail(ErrorKind::kDegenerateData,
           "feature '" + dataset.descriptors[static_cast<std::size_t>(j)].name() +
               "' is constant on the fitting rows");
    }
  }
  return stats;
}

inline StandardizationStats fit_standardizer(const Dataset& dataset) {
  std::vector<std::size_t> all(dataset.n_samples());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return fit_standardizer(dataset, all);
}

inline Dataset apply_standardizer(const Dataset& dataset, const StandardizationStats& stats) {
  Dataset out = dataset;
  out.features = stats.transform(dataset.features);
  return out;
}

// ---------------------------------------------------------------------------
// Folds

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
  }
};

/// Shuffles each class by seed and deals it round-robin into k folds. The
/// dealing offset carries over between classes so fold sizes stay balanced.
inline FoldAssignment stratified_folds(std::span<const Label> labels, std::size_t k,
                                       std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::kStratification, "k must be at least 2");
  FoldAssignment out{k, std::vector<std::size_t>(labels.size(), 0), seed};
  std::size_t next = 0;
  for (const Label cls : {Label::kMalignant, Label::kBenign}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() < k) {
      fail(ErrorKind::kStratification,
           std::string(cls == Label::kMalignant ? "malignant" : "benign") + " class has " +
               std::to_string(members.size()) + " members, fewer than k=" + std::to_string(k));
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    rng.shuffle(std::span<std::size_t>(members));
    for (const auto i : members) {
      out.fold_of[i] = next;
      next = (next + 1) % k;
    }
  }
  return out;
}

inline FoldAssignment stratified_folds(const Dataset& dataset, std::size_t k,
                                       std::uint64_t seed) {
  return stratified_folds(std::span<const Label>(dataset.labels), k, seed);
}

// ---------------------------------------------------------------------------
// Subsets

inline Dataset subset_features(const Dataset& dataset, std::span<const std::size_t> indices) {
  std::vector<bool> seen(dataset.n_features(), false);
  for (const auto j : indices) {
    if (j >= dataset.n_features()) {
      fail(ErrorKind::kSelection, "feature index " + std::to_string(j) + " out of range");
    }
    if (seen[j]) fail(ErrorKind::kSelection, "duplicate feature index " + std::to_string(j));
    seen[j] = true;
  }
  Dataset out;
  out.ids = dataset.ids;
  out.labels = dataset.labels;
  out.features.resize(dataset.features.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    out.features.col(static_cast<Eigen::Index>(c)) =
        dataset.features.col(static_cast<Eigen::Index>(indices[c]));
    out.descriptors.push_back(dataset.descriptors[indices[c]]);
  }
  return out;
}

inline Dataset subset_rows(const Dataset& dataset, std::span<const std::size_t> rows) {
  Dataset out;
  out.descriptors = dataset.descriptors;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), dataset.features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= dataset.n_samples()) {
      fail(ErrorKind::kSelection, "row index " + std::to_string(rows[r]) + " out of range");
    }
    out.features.row(static_cast<Eigen::Index>(r)) =
        dataset.features.row(static_cast<Eigen::Index>(rows[r]));
    out.ids.push_back(dataset.ids[rows[r]]);
    out.labels.push_back(dataset.labels[rows[r]]);
  }
  return out;
}

}  // namespace bcx
