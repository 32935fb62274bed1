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
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcx/dataset.hpp"
#include "bcx/error.hpp"
#include "bcx/random.hpp"

namespace bcx {

// Fully connected sigmoid network for binary classification. Each hidden
// layer is affine -> batch-norm -> scale/shift -> sigmoid; the output layer
// is affine -> sigmoid and produces the malignancy probability.

struct BatchNorm {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
  double epsilon = 1e-5;
  double momentum = 0.9;
};

struct MlpHyperparams {
  std::size_t epochs = 400;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

struct MlpModel {
  /// Input width first, 1 last.
  std::vector<std::size_t> layer_sizes;
  /// weights[l] is (layer_sizes[l+1] x layer_sizes[l]).
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  /// One per hidden layer.
  std::vector<BatchNorm> norms;
  MlpHyperparams hyper;

  std::size_t n_layers() const { return weights.size(); }
  std::size_t n_inputs() const { return layer_sizes.front(); }
};

enum class ForwardMode { kTrain, kInfer };

inline MlpModel mlp_init(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) fail(ErrorKind::kConfig, "an MLP needs at least 2 layer sizes");
  for (const auto s : layer_sizes) {
    if (s == 0) fail(ErrorKind::kConfig, "zero-size layer");
  }
  if (layer_sizes.back() != 1) fail(ErrorKind::kConfig, "output layer must have exactly 1 unit");

  MlpModel model;
  model.layer_sizes = std::move(layer_sizes);
  model.hyper.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(model.layer_sizes[l]);
    const auto fan_out = static_cast<Eigen::Index>(model.layer_sizes[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < fan_out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-limit, limit);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    if (l + 2 < model.layer_sizes.size()) {
      BatchNorm bn;
      bn.gamma = Eigen::VectorXd::Ones(fan_out);
      bn.beta = Eigen::VectorXd::Zero(fan_out);
      bn.running_mean = Eigen::VectorXd::Zero(fan_out);
      bn.running_var = Eigen::VectorXd::Ones(fan_out);
      model.norms.push_back(std::move(bn));
    }
  }
  return model;
}

namespace detail {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return (1.0 + (-z).exp()).inverse(); }

/// Numerically stable mean binary cross-entropy from logits.
inline double bce_from_logits(const Eigen::VectorXd& logits, const Eigen::VectorXd& targets) {
  const Eigen::ArrayXd z = logits.array();
  const Eigen::ArrayXd per =
      z.max(0.0) - targets.array() * z + (-(z.abs())).exp().log1p();
  return per.mean();
}

inline Eigen::MatrixXd to_colmajor(const Matrix& x) { return Eigen::MatrixXd(x); }

}  // namespace detail

/// Per-layer values retained by a train-mode forward pass.
struct ForwardTrace {
  /// activations[0] is the input; activations[l+1] is the output of layer l.
  std::vector<Eigen::MatrixXd> activations;
  /// Normalized pre-activations (before scale/shift), one per hidden layer.
  std::vector<Eigen::MatrixXd> normalized;
  std::vector<Eigen::VectorXd> batch_mean;
  std::vector<Eigen::VectorXd> batch_var;
  Eigen::VectorXd logits;
};

/// Train-mode forward pass using batch statistics. Does not touch running
/// statistics.
inline ForwardTrace mlp_forward_trace(const MlpModel& model, const Eigen::MatrixXd& batch) {
  if (batch.rows() < 2) {
    fail(ErrorKind::kBatchNorm, "train-mode batch norm needs a batch of at least 2 rows");
  }
  if (static_cast<std::size_t>(batch.cols()) != model.n_inputs()) {
    fail(ErrorKind::kShape, "MLP expects " + std::to_string(model.n_inputs()) +
                                " inputs, got " + std::to_string(batch.cols()));
  }
  ForwardTrace trace;
  trace.activations.push_back(batch);
  const auto batch_size = static_cast<double>(batch.rows());
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    Eigen::MatrixXd z = trace.activations.back() * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    if (l + 1 == model.n_layers()) {
      trace.logits = z.col(0);
      trace.activations.push_back(detail::sigmoid(z.array()).matrix());
      break;
    }
    const auto& bn = model.norms[l];
    const Eigen::VectorXd mean = z.colwise().mean().transpose();
    z.rowwise() -= mean.transpose();
    const Eigen::VectorXd var = z.array().square().colwise().sum().transpose() / batch_size;
    const Eigen::ArrayXd inv_std = (var.array() + bn.epsilon).rsqrt();
    Eigen::MatrixXd zhat = (z.array().rowwise() * inv_std.transpose()).matrix();
    Eigen::ArrayXXd y = zhat.array().rowwise() * bn.gamma.transpose().array();
    y.rowwise() += bn.beta.transpose().array();
    trace.activations.push_back(detail::sigmoid(y).matrix());
    trace.normalized.push_back(std::move(zhat));
    trace.batch_mean.push_back(mean);
    trace.batch_var.push_back(var);
  }
  return trace;
}

/// Inference-mode forward pass on column-major input.
inline Eigen::VectorXd mlp_infer(const MlpModel& model, const Eigen::MatrixXd& batch) {
  if (static_cast<std::size_t>(batch.cols()) != model.n_inputs()) {
    fail(ErrorKind::kShape, "MLP expects " + std::to_string(model.n_inputs()) +
                                " inputs, got " + std::to_string(batch.cols()));
  }
  Eigen::MatrixXd a = batch;
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    Eigen::MatrixXd z = a * model.weights[l].transpose();
    if (l + 1 < model.n_layers()) {
      const auto& bn = model.norms[l];
      const Eigen::ArrayXd scale =
          bn.gamma.array() * (bn.running_var.array() + bn.epsilon).rsqrt();
      const Eigen::ArrayXd shift =
          bn.beta.array() + (model.biases[l].array() - bn.running_mean.array()) * scale;
      Eigen::ArrayXXd y = z.array().rowwise() * scale.transpose();
      y.rowwise() += shift.transpose();
      a = detail::sigmoid(y).matrix();
    } else {
      z.rowwise() += model.biases[l].transpose();
      a = detail::sigmoid(z.array()).matrix();
    }
  }
  return a.col(0);
}

inline Vector mlp_forward(const MlpModel& model, const Matrix& batch) {
  if (batch.rows() == 0) fail(ErrorKind::kShape, "empty batch");
  return mlp_infer(model, detail::to_colmajor(batch));
}

inline void update_running_stats(MlpModel& model, const ForwardTrace& trace) {
  for (std::size_t l = 0; l < model.norms.size(); ++l) {
    auto& bn = model.norms[l];
    bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * trace.batch_mean[l];
    bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * trace.batch_var[l];
  }
}

/// Forward pass in either mode. Train mode normalizes with batch statistics
/// and folds them into the running statistics.
inline Vector mlp_forward(MlpModel& model, const Matrix& batch, ForwardMode mode) {
  if (batch.rows() == 0) fail(ErrorKind::kShape, "empty batch");
  if (mode == ForwardMode::kInfer) return mlp_infer(model, detail::to_colmajor(batch));
  const auto trace = mlp_forward_trace(model, detail::to_colmajor(batch));
  update_running_stats(model, trace);
  return trace.activations.back().col(0);
}

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Eigen::VectorXd> gamma;
  std::vector<Eigen::VectorXd> beta;
};

/// Mean binary cross-entropy of a train-mode pass and its exact gradient.
inline double mlp_loss_and_gradients(const MlpModel& model, const ForwardTrace& trace,
                                     const Eigen::VectorXd& targets, MlpGradients& grad) {
  const std::size_t layers = model.n_layers();
  const auto batch_size = static_cast<double>(targets.size());
  grad.weights.resize(layers);
  grad.biases.resize(layers);
  grad.gamma.resize(model.norms.size());
  grad.beta.resize(model.norms.size());

  // d(loss)/d(logit) = (p - y) / B
  Eigen::MatrixXd dz = (trace.activations.back().col(0) - targets) / batch_size;
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd& input = trace.activations[l];
    if (l + 1 < layers) {
      // dz currently holds d/d(activation) of this layer's sigmoid output.
      const auto& out = trace.activations[l + 1].array();
      const Eigen::ArrayXXd dy = dz.array() * out * (1.0 - out);
      const Eigen::ArrayXXd& zhat = trace.normalized[l].array();
      const auto& bn = model.norms[l];
      grad.gamma[l] = (dy * zhat).colwise().sum().transpose();
      grad.beta[l] = dy.colwise().sum().transpose();
      const Eigen::ArrayXXd dzhat = dy.rowwise() * bn.gamma.transpose().array();
      const Eigen::ArrayXd inv_std = (trace.batch_var[l].array() + bn.epsilon).rsqrt();
      const Eigen::ArrayXd sum_dzhat = dzhat.colwise().sum().transpose();
      const Eigen::ArrayXd sum_dzhat_zhat = (dzhat * zhat).colwise().sum().transpose();
      Eigen::ArrayXXd dpre = batch_size * dzhat;
      dpre.rowwise() -= sum_dzhat.transpose();
      dpre -= zhat.rowwise() * sum_dzhat_zhat.transpose();
      dpre.rowwise() *= (inv_std / batch_size).transpose();
      dz = dpre.matrix();
    }
    grad.weights[l] = dz.transpose() * input;
    grad.biases[l] = dz.colwise().sum().transpose();
    if (l > 0) dz = dz * model.weights[l];
  }
  return detail::bce_from_logits(trace.logits, targets);
}

/// Convenience wrapper: train-mode loss and gradient for (batch, targets).
inline double mlp_loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& batch,
                                     const Eigen::VectorXd& targets, MlpGradients& grad) {
  return mlp_loss_and_gradients(model, mlp_forward_trace(model, batch), targets, grad);
}

inline void apply_gradients(MlpModel& model, const MlpGradients& grad, double learning_rate) {
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    model.weights[l] -= learning_rate * grad.weights[l];
    model.biases[l] -= learning_rate * grad.biases[l];
  }
  for (std::size_t l = 0; l < model.norms.size(); ++l) {
    model.norms[l].gamma -= learning_rate * grad.gamma[l];
    model.norms[l].beta -= learning_rate * grad.beta[l];
  }
}

struct MlpTrainResult {
  MlpModel model;
  /// Mean per-sample loss of each epoch.
  std::vector<double> loss_trace;
};

/// Splits a permutation of n indices into batches of `batch_size`; a final
/// batch of one row is merged into the previous batch.
inline std::vector<std::span<const std::size_t>> make_batches(std::span<const std::size_t> order,
                                                              std::size_t batch_size) {
  std::vector<std::span<const std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, order.size() - start);
    if (len == 1 && !batches.empty()) {
      const auto& prev = batches.back();
      batches.back() = order.subspan(start - prev.size(), prev.size() + 1);
    } else {
      batches.push_back(order.subspan(start, len));
    }
  }
  return batches;
}

/// Mini-batch gradient descent on binary cross-entropy. Inputs are expected
/// to be standardized or otherwise well scaled.
inline MlpTrainResult mlp_train(MlpModel model, const Matrix& x, std::span<const Label> y,
                                const MlpHyperparams& hyper) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    fail(ErrorKind::kShape, "X has " + std::to_string(x.rows()) + " rows but y has " +
                                std::to_string(y.size()) + " labels");
  }
  if (y.size() < 2) fail(ErrorKind::kBatchNorm, "training needs at least 2 samples");
  std::size_t malignant = 0;
  for (const auto label : y) malignant += (label == Label::kMalignant);
  if (malignant == 0 || malignant == y.size()) {
    fail(ErrorKind::kDegenerateLabel, "training labels contain a single class");
  }
  if (hyper.batch_size < 2) fail(ErrorKind::kConfig, "batch size must be at least 2");
  if (!(hyper.learning_rate > 0.0)) fail(ErrorKind::kConfig, "learning rate must be positive");
  model.hyper = hyper;

  const Eigen::MatrixXd inputs = detail::to_colmajor(x);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) targets[static_cast<Eigen::Index>(i)] = to_target(y[i]);

  MlpTrainResult result;
  result.loss_trace.reserve(hyper.epochs);
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(hyper.seed, 0x5348554646ULL));
  MlpGradients grad;
  Eigen::MatrixXd batch_x;
  Eigen::VectorXd batch_y;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (const auto batch : make_batches(order, hyper.batch_size)) {
      const auto b = static_cast<Eigen::Index>(batch.size());
      batch_x.resize(b, inputs.cols());
      batch_y.resize(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        batch_x.row(i) = inputs.row(static_cast<Eigen::Index>(batch[static_cast<std::size_t>(i)]));
        batch_y[i] = targets[static_cast<Eigen::Index>(batch[static_cast<std::size_t>(i)])];
      }
      const auto trace = mlp_forward_trace(model, batch_x);
      const double loss = mlp_loss_and_gradients(model, trace, batch_y, grad);
      if (!std::isfinite(loss)) {
        fail(ErrorKind::kTraining, "loss diverged at epoch " + std::to_string(epoch + 1));
      }
      loss_sum += loss * static_cast<double>(b);
      apply_gradients(model, grad, hyper.learning_rate);
      update_running_stats(model, trace);
    }
    result.loss_trace.push_back(loss_sum / static_cast<double>(y.size()));
  }
  result.model = std::move(model);
  return result;
}

}  // namespace bcx
