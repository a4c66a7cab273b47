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

// In-process oracle over a reference model.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>

#include "tsxai/core.hpp"
#include "tsxai/oracle.hpp"
#include "tsxai/reference/model.hpp"
#include "tsxai/reference/saliency.hpp"

namespace tsxai::reference {

struct SaliencyConfig {
  int smoothgrad_samples = 60;
  double smoothgrad_sigma = 0.2;  // relative to data_range
  double data_range = 1.0;        // max - min of the training data
  int ig_steps = 60;
  std::size_t occlusion_window = 8;
  std::size_t occlusion_stride = 4;
  // Per-(channel, time) mean of the training data; zeros when empty.
  Matrix fill;
};

inline constexpr const char* kMethodGradient = "gradient";
inline constexpr const char* kMethodSmoothGrad = "smoothgrad";
inline constexpr const char* kMethodIntegratedGradients = "integrated_gradients";
inline constexpr const char* kMethodOcclusion = "occlusion";
inline constexpr const char* kMethodRandom = "random";

inline std::uint64_t sample_seed(const TimeSeriesSample& s, std::uint64_t seed) {
  return mix_seed(fnv1a(s.id()), seed);
}

class ReferenceOracle final : public Oracle {
 public:
  ReferenceOracle(std::shared_ptr<const Model> trained, SaliencyConfig cfg)
      : trained_(std::move(trained)), cfg_(std::move(cfg)) {
    if (cfg_.fill.size() == 0) cfg_.fill = Matrix(trained_->channels(), trained_->length());
    require_same_shape(cfg_.fill, Matrix(trained_->channels(), trained_->length()), "occlusion fill");
  }

  OracleInfo describe() override {
    OracleInfo info;
    info.num_classes = trained_->num_classes();
    info.channels = trained_->channels();
    info.length = trained_->length();
    info.layer_count = trained_->layer_count();
    info.task_kind = trained_->task_kind();
    info.methods = {kMethodGradient, kMethodSmoothGrad, kMethodIntegratedGradients,
                    kMethodOcclusion, kMethodRandom};
    return info;
  }

  Prediction predict(const TimeSeriesSample& sample) override {
    check(sample);
    Prediction p;
    const Model& m = model();
    const Matrix dense = m.dense_probabilities(sample.values());
    p.softmax = m.probabilities(sample.values());
    if (m.task_kind() == TaskKind::kSegmentation) p.dense_softmax = dense;
    p.model_state_id = state_id();
    return p;
  }

  SaliencyMap saliency(const TimeSeriesSample& sample, ClassLabel target,
                       const std::string& method, std::uint64_t seed) override {
    check(sample);
    const Model& m = model();
    if (target.index < 0 || target.index >= m.num_classes())
      throw OracleError("target class out of range");
    const Matrix& x = sample.values();
    SaliencyMap out;
    out.target_class = target;
    out.method_id = method;
    out.model_state_id = state_id();
    if (method == kMethodGradient) {
      out.relevance = gradient_saliency(m, x, target);
    } else if (method == kMethodSmoothGrad) {
      out.relevance = smoothgrad(m, x, target, cfg_.smoothgrad_samples,
                                 cfg_.smoothgrad_sigma * cfg_.data_range, sample_seed(sample, seed));
    } else if (method == kMethodIntegratedGradients) {
      out.relevance = integrated_gradients(m, x, target, cfg_.ig_steps, Matrix(x.rows(), x.cols()));
    } else if (method == kMethodOcclusion) {
      out.relevance = occlusion(m, x, target, std::min(cfg_.occlusion_window, x.cols()),
                                cfg_.occlusion_stride, cfg_.fill);
    } else if (method == kMethodRandom) {
      out.relevance = random_saliency(x.rows(), x.cols(), sample_seed(sample, seed));
    } else {
      throw OracleError("unsupported method '" + method + "'");
    }
    validate_saliency(out, sample);
    return out;
  }

  CascadeSession begin_cascade(std::uint64_t seed) override {
    randomized_ = trained_->clone();
    session_ = CascadeSession{"cascade-" + std::to_string(++session_counter_), 0, seed};
    return *session_;
  }

  CascadeSession advance_cascade(const CascadeSession& session) override {
    if (!session_ || session.session_id != session_->session_id)
      throw OracleError("no active cascade session '" + session.session_id + "'");
    if (session_->layers_randomized >= trained_->layer_count())
      throw OracleError("cascade already randomized all " +
                        std::to_string(trained_->layer_count()) + " layers");
    std::mt19937_64 rng(mix_seed(session_->seed, static_cast<std::uint64_t>(session_->layers_randomized)));
    randomized_->randomize_from_output(session_->layers_randomized, rng);
    ++session_->layers_randomized;
    return *session_;
  }

  std::string reset() override {
    session_.reset();
    randomized_.reset();
    return state_id();
  }

  std::string state_id() override {
    if (!session_ || session_->layers_randomized == 0) return "trained";
    return "cascade-" + std::to_string(session_->seed) + "-" +
           std::to_string(session_->layers_randomized);
  }

  const Model& model() const { return session_ && randomized_ ? *randomized_ : *trained_; }
  const SaliencyConfig& config() const { return cfg_; }

 private:
  void check(const TimeSeriesSample& s) const {
    if (s.channels() != trained_->channels() || s.length() != trained_->length())
      throw OracleError("sample shape does not match the model");
  }

  std::shared_ptr<const Model> trained_;
  SaliencyConfig cfg_;
  std::unique_ptr<Model> randomized_;
  std::optional<CascadeSession> session_;
  std::uint64_t session_counter_ = 0;
};

/// Factory producing independent oracles that share one trained model.
inline OracleFactory reference_factory(std::shared_ptr<const Model> trained, SaliencyConfig cfg) {
  return [trained = std::move(trained), cfg = std::move(cfg)]() -> std::unique_ptr<Oracle> {
    return std::make_unique<ReferenceOracle>(trained, cfg);
  };
}

}  // namespace tsxai::reference
