// Copyright 2026 The tsxai Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Desk-scale differentiable models behind the in-process oracle: a small
// 1-D convolutional classifier/segmenter and a linear classifier, both with
// hand-written backpropagation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsxai/core.hpp"

namespace tsxai::reference {

/// One parameterized layer: flat weights plus bias, with its init bound.
struct ParamLayer {
  std::vector<double> weights;
  std::vector<double> bias;
  std::size_t fan_in = 1;

  /// Re-draws from the default initializer U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  void initialize(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : weights) w = u(rng);
    for (double& b : bias) b = u(rng);
  }
  void zero() {
    std::fill(weights.begin(), weights.end(), 0.0);
    std::fill(bias.begin(), bias.end(), 0.0);
  }
  friend bool operator==(const ParamLayer&, const ParamLayer&) = default;
};

/// Softmax of `z` (numerically shifted).
inline std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.begin(), z.end());
  const double mx = *std::max_element(p.begin(), p.end());
  double s = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

/// Common surface of the reference models. Logits are C x T_out: one column
/// for classifiers, one per step for segmenters.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::unique_ptr<Model> clone() const = 0;
  virtual TaskKind task_kind() const = 0;
  virtual int num_classes() const = 0;
  virtual std::size_t channels() const = 0;
  virtual std::size_t length() const = 0;

  /// Parameterized layers, input first.
  virtual std::vector<ParamLayer>& layers() = 0;
  virtual const std::vector<ParamLayer>& layers() const = 0;
  int layer_count() const { return static_cast<int>(layers().size()); }

  virtual Matrix logits(const Matrix& x) const = 0;

  /// Backpropagates d(loss)/d(logits). Either output may be null.
  virtual void backward(const Matrix& x, const Matrix& dlogits, std::vector<ParamLayer>* grads,
                        Matrix* dx) const = 0;

  /// ReLU on/off pattern; empty for models without kinks.
  virtual std::vector<bool> activation_pattern(const Matrix& x) const = 0;

  /// Class score used by gradient saliency: the sum of the class logit over
  /// output columns.
  double class_score(const Matrix& x, ClassLabel c) const {
    const Matrix z = logits(x);
    double s = 0.0;
    for (std::size_t t = 0; t < z.cols(); ++t) s += z(static_cast<std::size_t>(c.index), t);
    return s;
  }

  Matrix input_gradient(const Matrix& x, ClassLabel c) const {
    const Matrix z = logits(x);
    Matrix dz(z.rows(), z.cols());
    for (std::size_t t = 0; t < z.cols(); ++t) dz(static_cast<std::size_t>(c.index), t) = 1.0;
    Matrix dx;
    backward(x, dz, nullptr, &dx);
    return dx;
  }

  /// Per-step probabilities, C x T_out.
  Matrix dense_probabilities(const Matrix& x) const {
    const Matrix z = logits(x);
    Matrix p(z.rows(), z.cols());
    std::vector<double> col(z.rows());
    for (std::size_t t = 0; t < z.cols(); ++t) {
      for (std::size_t c = 0; c < z.rows(); ++c) col[c] = z(c, t);
      const auto s = softmax(col);
      for (std::size_t c = 0; c < z.rows(); ++c) p(c, t) = s[c];
    }
    return p;
  }

  /// Class probabilities; segmenters average per-step probabilities over time.
  std::vector<double> probabilities(const Matrix& x) const {
    const Matrix p = dense_probabilities(x);
    std::vector<double> out(p.rows(), 0.0);
    for (std::size_t c = 0; c < p.rows(); ++c) {
      for (std::size_t t = 0; t < p.cols(); ++t) out[c] += p(c, t);
      out[c] /= static_cast<double>(p.cols());
    }
    return out;
  }

  /// Re-initializes the k-th parameterized layer counted from the output
  /// (k = 0 is the head).
  void randomize_from_output(int k, std::mt19937_64& rng) {
    auto& ls = layers();
    if (k < 0 || k >= static_cast<int>(ls.size())) throw std::out_of_range("no such layer");
    ls[ls.size() - 1 - static_cast<std::size_t>(k)].initialize(rng);
  }
};

struct ConvNetConfig {
  std::size_t channels = 1;
  std::size_t length = 64;
  int num_classes = 2;
  TaskKind task = TaskKind::kClassification;
  std::size_t kernel1 = 7;
  std::size_t filters1 = 8;
  std::size_t kernel2 = 5;
  std::size_t filters2 = 8;
  std::uint64_t seed = 0;
  bool zero_head = false;  // zero-initialize the final linear layer
};

/// conv(k1, f1) -> relu -> conv(k2, f2) -> relu -> {global average pool ->
/// linear(C) | per-step linear(C)}. Convolutions use zero "same" padding.
class ConvNet final : public Model {
 public:
  explicit ConvNet(const ConvNetConfig& cfg) : cfg_(cfg) {
    if (cfg.kernel1 % 2 == 0 || cfg.kernel2 % 2 == 0)
      throw ConfigError("convolution kernels must be odd");
    layers_.resize(3);
    layers_[0].weights.resize(cfg.filters1 * cfg.channels * cfg.kernel1);
    layers_[0].bias.resize(cfg.filters1);
    layers_[0].fan_in = cfg.channels * cfg.kernel1;
    layers_[1].weights.resize(cfg.filters2 * cfg.filters1 * cfg.kernel2);
    layers_[1].bias.resize(cfg.filters2);
    layers_[1].fan_in = cfg.filters1 * cfg.kernel2;
    layers_[2].weights.resize(static_cast<std::size_t>(cfg.num_classes) * cfg.filters2);
    layers_[2].bias.resize(static_cast<std::size_t>(cfg.num_classes));
    layers_[2].fan_in = cfg.filters2;
    std::mt19937_64 rng(cfg.seed);
    for (auto& l : layers_) l.initialize(rng);
    if (cfg.zero_head) layers_[2].zero();
  }

  const ConvNetConfig& config() const { return cfg_; }

  std::unique_ptr<Model> clone() const override { return std::make_unique<ConvNet>(*this); }
  TaskKind task_kind() const override { return cfg_.task; }
  int num_classes() const override { return cfg_.num_classes; }
  std::size_t channels() const override { return cfg_.channels; }
  std::size_t length() const override { return cfg_.length; }
  std::vector<ParamLayer>& layers() override { return layers_; }
  const std::vector<ParamLayer>& layers() const override { return layers_; }

  Matrix logits(const Matrix& x) const override {
    Cache c = forward(x);
    return std::move(c.z);
  }

  std::vector<bool> activation_pattern(const Matrix& x) const override {
    const Cache c = forward(x);
    std::vector<bool> p;
    p.reserve(c.a1.size() + c.a2.size());
    for (double v : c.a1.flat()) p.push_back(v > 0.0);
    for (double v : c.a2.flat()) p.push_back(v > 0.0);
    return p;
  }

  void backward(const Matrix& x, const Matrix& dz, std::vector<ParamLayer>* grads,
                Matrix* dx) const override {
    const Cache c = forward(x);
    const std::size_t T = cfg_.length;
    const std::size_t F1 = cfg_.filters1, F2 = cfg_.filters2;
    const std::size_t C = static_cast<std::size_t>(cfg_.num_classes);
    const auto& head = layers_[2];

    if (grads) {
      grads->resize(3);
      for (std::size_t l = 0; l < 3; ++l) {
        (*grads)[l].weights.assign(layers_[l].weights.size(), 0.0);
        (*grads)[l].bias.assign(layers_[l].bias.size(), 0.0);
        (*grads)[l].fan_in = layers_[l].fan_in;
      }
    }

    // Head.
    Matrix dr2(F2, T);
    if (cfg_.task == TaskKind::kClassification) {
      std::vector<double> dg(F2, 0.0);
      for (std::size_t k = 0; k < C; ++k) {
        const double d = dz(k, 0);
        for (std::size_t f = 0; f < F2; ++f) dg[f] += d * head.weights[k * F2 + f];
        if (grads) {
          for (std::size_t f = 0; f < F2; ++f) (*grads)[2].weights[k * F2 + f] += d * c.pooled[f];
          (*grads)[2].bias[k] += d;
        }
      }
      for (std::size_t f = 0; f < F2; ++f)
        for (std::size_t t = 0; t < T; ++t) dr2(f, t) = dg[f] / static_cast<double>(T);
    } else {
      for (std::size_t k = 0; k < C; ++k)
        for (std::size_t t = 0; t < T; ++t) {
          const double d = dz(k, t);
          if (d == 0.0) continue;
          for (std::size_t f = 0; f < F2; ++f) dr2(f, t) += d * head.weights[k * F2 + f];
          if (grads) {
            for (std::size_t f = 0; f < F2; ++f) (*grads)[2].weights[k * F2 + f] += d * c.r2(f, t);
            (*grads)[2].bias[k] += d;
          }
        }
    }

    Matrix da2 = relu_backward(dr2, c.a2);
    Matrix dr1(F1, T);
    conv_backward(c.r1, da2, layers_[1], cfg_.kernel2, grads ? &(*grads)[1] : nullptr, &dr1);
    Matrix da1 = relu_backward(dr1, c.a1);
    Matrix dinput(cfg_.channels, T);
    conv_backward(x, da1, layers_[0], cfg_.kernel1, grads ? &(*grads)[0] : nullptr,
                  dx ? &dinput : nullptr);
    if (dx) *dx = std::move(dinput);
  }

 private:
  struct Cache {
    Matrix a1, r1, a2, r2, z;
    std::vector<double> pooled;
  };

  static Matrix relu(const Matrix& a) {
    Matrix r = a;
    for (double& v : r.flat()) v = v > 0.0 ? v : 0.0;
    return r;
  }

  static Matrix relu_backward(const Matrix& dr, const Matrix& a) {
    Matrix d = dr;
    for (std::size_t k = 0; k < d.size(); ++k)
      if (!(a.flat()[k] > 0.0)) d.flat()[k] = 0.0;
    return d;
  }

  // out[f][t] = b[f] + sum_{c,k} w[f][c][k] * in[c][t + k - K/2]
  static Matrix conv_forward(const Matrix& in, const ParamLayer& l, std::size_t filters,
                             std::size_t kernel) {
    const std::size_t cin = in.rows(), T = in.cols();
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kernel / 2);
    Matrix out(filters, T);
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t t = 0; t < T; ++t) out(f, t) = l.bias[f];
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* w = &l.weights[(f * cin + ci) * kernel];
        const auto row = in.row(ci);
        for (std::size_t k = 0; k < kernel; ++k) {
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
          const std::size_t t0 = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
          const std::size_t t1 = shift > 0 ? T - static_cast<std::size_t>(shift) : T;
          for (std::size_t t = t0; t < t1; ++t)
            out(f, t) += w[k] * row[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t) + shift)];
        }
      }
    }
    return out;
  }

  static void conv_backward(const Matrix& in, const Matrix& dout, const ParamLayer& l,
                            std::size_t kernel, ParamLayer* g, Matrix* din) {
    const std::size_t cin = in.rows(), T = in.cols(), filters = dout.rows();
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kernel / 2);
    for (std::size_t f = 0; f < filters; ++f) {
      const auto drow = dout.row(f);
      if (g)
        for (std::size_t t = 0; t < T; ++t) g->bias[f] += drow[t];
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* w = &l.weights[(f * cin + ci) * kernel];
        double* gw = g ? &g->weights[(f * cin + ci) * kernel] : nullptr;
        const auto row = in.row(ci);
        for (std::size_t k = 0; k < kernel; ++k) {
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
          const std::size_t t0 = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
          const std::size_t t1 = shift > 0 ? T - static_cast<std::size_t>(shift) : T;
          double acc = 0.0;
          for (std::size_t t = t0; t < t1; ++t) {
            const std::size_t s = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t) + shift);
            acc += drow[t] * row[s];
            if (din) (*din)(ci, s) += drow[t] * w[k];
          }
          if (gw) gw[k] += acc;
        }
      }
    }
  }

  Cache forward(const Matrix& x) const {
    if (x.rows() != cfg_.channels || x.cols() != cfg_.length)
      throw InvariantError("model input shape mismatch");
    Cache c;
    c.a1 = conv_forward(x, layers_[0], cfg_.filters1, cfg_.kernel1);
    c.r1 = relu(c.a1);
    c.a2 = conv_forward(c.r1, layers_[1], cfg_.filters2, cfg_.kernel2);
    c.r2 = relu(c.a2);
    const std::size_t C = static_cast<std::size_t>(cfg_.num_classes);
    const std::size_t F2 = cfg_.filters2, T = cfg_.length;
    const auto& head = layers_[2];
    if (cfg_.task == TaskKind::kClassification) {
      c.pooled.assign(F2, 0.0);
      for (std::size_t f = 0; f < F2; ++f) {
        for (std::size_t t = 0; t < T; ++t) c.pooled[f] += c.r2(f, t);
        c.pooled[f] /= static_cast<double>(T);
      }
      c.z = Matrix(C, 1);
      for (std::size_t k = 0; k < C; ++k) {
        double s = head.bias[k];
        for (std::size_t f = 0; f < F2; ++f) s += head.weights[k * F2 + f] * c.pooled[f];
        c.z(k, 0) = s;
      }
    } else {
      c.z = Matrix(C, T);
      for (std::size_t k = 0; k < C; ++k)
        for (std::size_t t = 0; t < T; ++t) {
          double s = head.bias[k];
          for (std::size_t f = 0; f < F2; ++f) s += head.weights[k * F2 + f] * c.r2(f, t);
          c.z(k, t) = s;
        }
    }
    return c;
  }

  ConvNetConfig cfg_;
  std::vector<ParamLayer> layers_;
};

/// logits = W * vec(X) + b, with W of shape C x (H*T).
class LinearModel final : public Model {
 public:
  LinearModel(std::size_t channels, std::size_t length, int num_classes, std::uint64_t seed = 0)
      : channels_(channels), length_(length), classes_(num_classes) {
    layers_.resize(1);
    layers_[0].weights.resize(static_cast<std::size_t>(num_classes) * channels * length);
    layers_[0].bias.resize(static_cast<std::size_t>(num_classes));
    layers_[0].fan_in = channels * length;
    std::mt19937_64 rng(seed);
    layers_[0].initialize(rng);
  }

  /// Hand-built model; `weights` rows are classes, each H*T long (row-major).
  static LinearModel from_weights(std::size_t channels, std::size_t length,
                                  const std::vector<std::vector<double>>& weights,
                                  std::vector<double> bias = {}) {
    LinearModel m(channels, length, static_cast<int>(weights.size()));
    auto& l = m.layers_[0];
    for (std::size_t c = 0; c < weights.size(); ++c) {
      if (weights[c].size() != channels * length) throw InvariantError("weight row size mismatch");
      std::copy(weights[c].begin(), weights[c].end(), l.weights.begin() + static_cast<std::ptrdiff_t>(c * channels * length));
    }
    if (bias.empty()) bias.assign(weights.size(), 0.0);
    l.bias = std::move(bias);
    return m;
  }

  Matrix weight_row(ClassLabel c) const {
    const std::size_t n = channels_ * length_;
    const auto begin = layers_[0].weights.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c.index) * n);
    return Matrix(channels_, length_, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(n)));
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<LinearModel>(*this); }
  TaskKind task_kind() const override { return TaskKind::kClassification; }
  int num_classes() const override { return classes_; }
  std::size_t channels() const override { return channels_; }
  std::size_t length() const override { return length_; }
  std::vector<ParamLayer>& layers() override { return layers_; }
  const std::vector<ParamLayer>& layers() const override { return layers_; }
  std::vector<bool> activation_pattern(const Matrix&) const override { return {}; }

  Matrix logits(const Matrix& x) const override {
    check(x);
    const std::size_t n = channels_ * length_;
    Matrix z(static_cast<std::size_t>(classes_), 1);
    for (std::size_t c = 0; c < z.rows(); ++c) {
      double s = layers_[0].bias[c];
      for (std::size_t k = 0; k < n; ++k) s += layers_[0].weights[c * n + k] * x.flat()[k];
      z(c, 0) = s;
    }
    return z;
  }

  void backward(const Matrix& x, const Matrix& dz, std::vector<ParamLayer>* grads,
                Matrix* dx) const override {
    check(x);
    const std::size_t n = channels_ * length_;
    if (grads) {
      grads->assign(1, ParamLayer{std::vector<double>(layers_[0].weights.size(), 0.0),
                                  std::vector<double>(layers_[0].bias.size(), 0.0),
                                  layers_[0].fan_in});
    }
    if (dx) *dx = Matrix(channels_, length_);
    for (std::size_t c = 0; c < static_cast<std::size_t>(classes_); ++c) {
      const double d = dz(c, 0);
      if (grads) {
        (*grads)[0].bias[c] += d;
        for (std::size_t k = 0; k < n; ++k) (*grads)[0].weights[c * n + k] += d * x.flat()[k];
      }
      if (dx)
        for (std::size_t k = 0; k < n; ++k) dx->flat()[k] += d * layers_[0].weights[c * n + k];
    }
  }

 private:
  void check(const Matrix& x) const {
    if (x.rows() != channels_ || x.cols() != length_)
      throw InvariantError("model input shape mismatch");
  }

  std::size_t channels_, length_;
  int classes_;
  std::vector<ParamLayer> layers_;
};

struct TrainConfig {
  int epochs = 150;
  double learning_rate = 0.02;
  double l1_coeff = 0.0;
  double l2_coeff = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (l1_coeff < 0.0 || l2_coeff < 0.0) throw ConfigError("regularization must be >= 0");
  }
};

/// Raised when training produces a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  double final_loss = 0.0;
  double accuracy = 0.0;
};

inline int argmax_col(const Matrix& z, std::size_t t) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < z.rows(); ++c)
    if (z(c, t) > z(best, t)) best = c;
  return static_cast<int>(best);
}

/// Per-column cross-entropy gradient for the labels of one sample; returns the
/// summed loss and the number of labeled columns.
inline std::pair<double, std::size_t> cross_entropy(const Model& model, const Matrix& x,
                                                    const Dataset& data, std::size_t i,
                                                    Matrix* dz) {
  const Matrix z = model.logits(x);
  if (dz) *dz = Matrix(z.rows(), z.cols());
  double loss = 0.0;
  std::size_t count = 0;
  std::vector<double> col(z.rows());
  for (std::size_t t = 0; t < z.cols(); ++t) {
    std::optional<int> label;
    if (data.task_kind() == TaskKind::kClassification) label = data.labels()[i].index;
    else label = data.dense_labels()[i][t];
    if (!label) continue;
    for (std::size_t c = 0; c < z.rows(); ++c) col[c] = z(c, t);
    const auto p = softmax(col);
    loss -= std::log(std::max(p[static_cast<std::size_t>(*label)], 1e-300));
    ++count;
    if (dz)
      for (std::size_t c = 0; c < z.rows(); ++c)
        (*dz)(c, t) = p[c] - (static_cast<int>(c) == *label ? 1.0 : 0.0);
  }
  return {loss, count};
}

/// Fraction of correctly predicted samples (classification) or labeled steps
/// (segmentation).
inline double accuracy(const Model& model, const Dataset& data) {
  std::size_t hit = 0, total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.task_kind() == TaskKind::kClassification) {
      hit += argmax_col(model.logits(data.sample(i).values()), 0) == data.labels()[i].index;
      ++total;
    } else {
      const Matrix z = model.logits(data.sample(i).values());
      for (std::size_t t = 0; t < z.cols(); ++t) {
        const auto& l = data.dense_labels()[i][t];
        if (!l) continue;
        hit += argmax_col(z, t) == *l;
        ++total;
      }
    }
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

/// Full-batch Adam on mean cross-entropy + l1*|w|_1 + l2*|w|_2^2 (weights
/// only, biases unregularized). Deterministic for a given model and data.
inline TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.channels() != model.channels() || data.length() != model.length())
    throw InvariantError("training data shape does not match the model");
  if (data.task_kind() != model.task_kind())
    throw InvariantError("training data task kind does not match the model");

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  auto& params = model.layers();
  std::vector<ParamLayer> m1 = params, m2 = params;
  for (auto* set : {&m1, &m2})
    for (auto& l : *set) l.zero();

  double loss = 0.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<ParamLayer> total;
    std::vector<ParamLayer> g;
    double data_loss = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      Matrix dz;
      const auto& x = data.sample(i).values();
      const auto [l, n] = cross_entropy(model, x, data, i, &dz);
      data_loss += l;
      count += n;
      model.backward(x, dz, &g, nullptr);
      if (total.empty()) {
        total = g;
      } else {
        for (std::size_t li = 0; li < g.size(); ++li) {
          for (std::size_t k = 0; k < g[li].weights.size(); ++k) total[li].weights[k] += g[li].weights[k];
          for (std::size_t k = 0; k < g[li].bias.size(); ++k) total[li].bias[k] += g[li].bias[k];
        }
      }
    }
    const double scale = count ? 1.0 / static_cast<double>(count) : 0.0;
    double reg = 0.0;
    for (std::size_t li = 0; li < params.size(); ++li)
      for (std::size_t k = 0; k < params[li].weights.size(); ++k) {
        const double w = params[li].weights[k];
        reg += cfg.l1_coeff * std::fabs(w) + cfg.l2_coeff * w * w;
      }
    loss = data_loss * scale + reg;
    if (!std::isfinite(loss))
      throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                             " (loss " + std::to_string(loss) + ")");

    const double c1 = 1.0 - std::pow(kBeta1, epoch);
    const double c2 = 1.0 - std::pow(kBeta2, epoch);
    auto step = [&](double& p, double grad, double& a, double& b) {
      a = kBeta1 * a + (1.0 - kBeta1) * grad;
      b = kBeta2 * b + (1.0 - kBeta2) * grad * grad;
      p -= cfg.learning_rate * (a / c1) / (std::sqrt(b / c2) + kEps);
    };
    for (std::size_t li = 0; li < params.size(); ++li) {
      for (std::size_t k = 0; k < params[li].weights.size(); ++k) {
        const double w = params[li].weights[k];
        const double sign = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
        const double grad = total[li].weights[k] * scale + cfg.l1_coeff * sign + 2.0 * cfg.l2_coeff * w;
        step(params[li].weights[k], grad, m1[li].weights[k], m2[li].weights[k]);
      }
      for (std::size_t k = 0; k < params[li].bias.size(); ++k)
        step(params[li].bias[k], total[li].bias[k] * scale, m1[li].bias[k], m2[li].bias[k]);
    }
  }
  return {loss, accuracy(model, data)};
}

}  // namespace tsxai::reference
