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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bcx/dataset.hpp"
#include "bcx/ice.hpp"
#include "bcx/pca.hpp"
#include "bcx/random.hpp"
#include "bcx/shapley.hpp"
#include "bcx/tree.hpp"

namespace bcx::svg {

// Minimal SVG rendering for the report plots. Layout is best-effort; the CSV
// exports are the data of record.

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Canvas {
 public:
  Canvas(double width, double height) : width_(width), height_(height) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
         << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
         << "\" font-family=\"sans-serif\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0) {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
         << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
         << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke,
                double width, double opacity) {
    out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
         << "\" stroke-opacity=\"" << num(opacity) << "\" points=\"";
    for (const auto& [x, y] : pts) out_ << num(x) << ',' << num(y) << ' ';
    out_ << "\"/>\n";
  }

  void circle(double cx, double cy, double r, std::string_view fill, double opacity = 1.0) {
    out_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
         << "\" fill=\"" << fill << "\" fill-opacity=\"" << num(opacity) << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
         << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
         << "\"/>\n";
  }

  void text(double x, double y, std::string_view content, double size = 12,
            std::string_view anchor = "middle", double rotate = 0.0) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
         << "\" text-anchor=\"" << anchor << "\"";
    if (rotate != 0.0) {
      out_ << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' ' << num(y) << ")\"";
    }
    out_ << '>' << escape(content) << "</text>\n";
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

  double width() const { return width_; }
  double height() const { return height_; }

 private:
  double width_;
  double height_;
  std::ostringstream out_;
};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double map(double v) const {
    const double span = hi - lo;
    const double t = span > 0.0 ? (v - lo) / span : 0.5;
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

inline void draw_axes(Canvas& c, const Axis& x, const Axis& y, std::string_view xlabel,
                      std::string_view ylabel) {
  c.line(x.pixel_lo, y.pixel_lo, x.pixel_hi, y.pixel_lo, "black");
  c.line(x.pixel_lo, y.pixel_lo, x.pixel_lo, y.pixel_hi, "black");
  for (int i = 0; i <= 4; ++i) {
    const double vx = x.lo + (x.hi - x.lo) * i / 4.0;
    const double vy = y.lo + (y.hi - y.lo) * i / 4.0;
    c.text(x.map(vx), y.pixel_lo + 16, num(vx), 10);
    c.text(x.pixel_lo - 6, y.map(vy) + 4, num(vy), 10, "end");
  }
  c.text((x.pixel_lo + x.pixel_hi) / 2, y.pixel_lo + 34, xlabel, 12);
  c.text(x.pixel_lo - 44, (y.pixel_lo + y.pixel_hi) / 2, ylabel, 12, "middle", -90);
}

/// ICE curves in grey with the partial-dependence curve on top.
inline std::string ice_plot(const IceResult& ice, std::string_view feature_name,
                            std::string_view title) {
  Canvas c(720, 480);
  const Axis x{ice.grid[0], ice.grid[ice.grid.size() - 1], 70, 690};
  const Axis y{0.0, 1.0, 420, 40};
  draw_axes(c, x, y, feature_name, "P(malignant)");
  c.text(380, 24, title, 14);
  for (Eigen::Index i = 0; i < ice.curves.rows(); ++i) {
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index j = 0; j < ice.grid.size(); ++j) {
      pts.emplace_back(x.map(ice.grid[j]), y.map(ice.curves(i, j)));
    }
    c.polyline(pts, "#888888", 0.6, 0.25);
  }
  std::vector<std::pair<double, double>> pdp;
  for (Eigen::Index j = 0; j < ice.grid.size(); ++j) {
    pdp.emplace_back(x.map(ice.grid[j]), y.map(ice.pdp[j]));
  }
  c.polyline(pdp, "#d62728", 2.5, 1.0);
  return c.finish();
}

/// Blue (low) to red (high).
inline std::string value_colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(30 + 200 * t));
  const int b = static_cast<int>(std::lround(230 - 200 * t));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, 60, b);
  return buf;
}

/// Beeswarm-style summary: one row per feature in ranking order, x is the
/// attribution, colour the feature value.
inline std::string shapley_summary_plot(const ShapleySummary& s,
                                        std::span<const FeatureDescriptor> descriptors,
                                        std::size_t top = 20) {
  top = std::min(top, s.ranking.size());
  const double row_h = 22;
  Canvas c(760, 80 + row_h * static_cast<double>(top));
  const double lo = s.attributions.minCoeff();
  const double hi = s.attributions.maxCoeff();
  const Axis x{lo, hi, 220, 720};
  const double bottom = 50 + row_h * static_cast<double>(top);
  c.text(470, 24, "Shapley value summary", 14);
  c.line(x.map(0.0), 40, x.map(0.0), bottom, "#999999");
  c.line(x.pixel_lo, bottom, x.pixel_hi, bottom, "black");
  c.text(x.pixel_lo, bottom + 16, num(lo), 10);
  c.text(x.pixel_hi, bottom + 16, num(hi), 10);
  c.text((x.pixel_lo + x.pixel_hi) / 2, bottom + 30, "attribution (impact on P(malignant))", 12);
  for (std::size_t r = 0; r < top; ++r) {
    const auto j = static_cast<Eigen::Index>(s.ranking[r]);
    const double cy = 50 + row_h * (static_cast<double>(r) + 0.5);
    c.text(210, cy + 4, descriptors[s.ranking[r]].name(), 11, "end");
    const double vlo = s.feature_values.col(j).minCoeff();
    const double vhi = s.feature_values.col(j).maxCoeff();
    Rng jitter(derive_seed(0x4A4954ULL, static_cast<std::uint64_t>(j)));
    for (Eigen::Index i = 0; i < s.attributions.rows(); ++i) {
      const double t = vhi > vlo ? (s.feature_values(i, j) - vlo) / (vhi - vlo) : 0.5;
      c.circle(x.map(s.attributions(i, j)), cy + jitter.uniform(-7.0, 7.0), 1.8,
               value_colour(t), 0.7);
    }
  }
  return c.finish();
}

/// Side-by-side scatter of the first two principal components, coloured by
/// each model's predicted label.
inline std::string pca_pair_plot(const PcaProjection& pca, std::span<const Label> left_labels,
                                 std::string_view left_title, std::span<const Label> right_labels,
                                 std::string_view right_title) {
  Canvas c(1000, 460);
  const double x_lo = pca.coordinates.col(0).minCoeff();
  const double x_hi = pca.coordinates.col(0).maxCoeff();
  const double y_lo = pca.coordinates.col(1).minCoeff();
  const double y_hi = pca.coordinates.col(1).maxCoeff();
  const auto panel = [&](double offset, std::span<const Label> labels, std::string_view title) {
    const Axis x{x_lo, x_hi, offset + 60, offset + 470};
    const Axis y{y_lo, y_hi, 400, 40};
    draw_axes(c, x, y, "PC1", "PC2");
    c.text(offset + 265, 24, title, 14);
    for (Eigen::Index i = 0; i < pca.coordinates.rows(); ++i) {
      const bool malignant = labels[static_cast<std::size_t>(i)] == Label::kMalignant;
      c.circle(x.map(pca.coordinates(i, 0)), y.map(pca.coordinates(i, 1)), 2.5,
               malignant ? "#d62728" : "#1f77b4", 0.7);
    }
  };
  panel(0, left_labels, left_title);
  panel(500, right_labels, right_title);
  return c.finish();
}

/// Tree diagram; leaves are spread evenly, parents centred over children.
inline std::string tree_plot(const DecisionTreeModel& tree,
                             std::span<const FeatureDescriptor> descriptors,
                             std::size_t max_depth = 6) {
  std::vector<double> xpos(tree.nodes.size(), 0.0);
  std::vector<std::size_t> depth(tree.nodes.size(), 0);
  std::vector<bool> shown(tree.nodes.size(), false);
  double next_leaf = 0;
  // Post-order layout over the displayed part of the tree.
  struct Frame {
    std::size_t node;
    bool expanded;
  };
  std::vector<Frame> stack{{0, false}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [i, expanded] = stack.back();
    stack.pop_back();
    const auto& n = tree.nodes[i];
    shown[i] = true;
    const bool leaf_here = n.is_leaf() || depth[i] >= max_depth;
    deepest = std::max(deepest, depth[i]);
    if (leaf_here) {
      xpos[i] = next_leaf++;
      continue;
    }
    const auto l = static_cast<std::size_t>(n.left);
    const auto r = static_cast<std::size_t>(n.right);
    if (!expanded) {
      depth[l] = depth[r] = depth[i] + 1;
      stack.push_back({i, true});
      stack.push_back({r, false});
      stack.push_back({l, false});
    } else {
      xpos[i] = (xpos[l] + xpos[r]) / 2.0;
    }
  }
  const double box_w = 150;
  const double box_h = 46;
  const double gap_x = 160;
  const double gap_y = 90;
  Canvas c(std::max(400.0, next_leaf * gap_x + 40), static_cast<double>(deepest + 1) * gap_y + 40);
  const auto cx = [&](std::size_t i) { return 20 + xpos[i] * gap_x + box_w / 2; };
  const auto cy = [&](std::size_t i) { return 20 + static_cast<double>(depth[i]) * gap_y; };
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!shown[i]) continue;
    const auto& n = tree.nodes[i];
    if (!n.is_leaf() && depth[i] < max_depth) {
      for (const auto child : {static_cast<std::size_t>(n.left), static_cast<std::size_t>(n.right)}) {
        c.line(cx(i), cy(i) + box_h, cx(child), cy(child), "#555555");
      }
    }
    const bool malignant = label_from_probability(n.malignant_fraction()) == Label::kMalignant;
    c.rect(cx(i) - box_w / 2, cy(i), box_w, box_h, malignant ? "#f6d0d0" : "#d0e0f6", "#333333");
    const std::string head =
        n.is_leaf() ? std::string(malignant ? "malignant" : "benign")
                    : descriptors[static_cast<std::size_t>(n.feature)].name() + " <= " + num(n.threshold);
    c.text(cx(i), cy(i) + 18, head, 10);
    c.text(cx(i), cy(i) + 34,
           "B=" + std::to_string(n.counts[0]) + " M=" + std::to_string(n.counts[1]), 10);
  }
  return c.finish();
}

}  // namespace bcx::svg
