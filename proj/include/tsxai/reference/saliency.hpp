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

// Saliency methods of the reference backend.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "tsxai/core.hpp"
#include "tsxai/reference/model.hpp"

namespace tsxai::reference {

/// d(class score)/dx.
inline Matrix gradient_saliency(const Model& model, const Matrix& x, ClassLabel c) {
  return model.input_gradient(x, c);
}

/// Mean input gradient over `samples` Gaussian perturbations with absolute
/// standard deviation `noise_std`.
inline Matrix smoothgrad(const Model& model, const Matrix& x, ClassLabel c, int samples,
                         double noise_std, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("smoothgrad needs at least one sample");
  if (noise_std < 0.0) throw ConfigError("smoothgrad noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix acc(x.rows(), x.cols());
  Matrix xn = x;
  for (int s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < x.size(); ++k) xn.flat()[k] = x.flat()[k] + noise_std * noise(rng);
    const Matrix g = model.input_gradient(xn, c);
    for (std::size_t k = 0; k < acc.size(); ++k) acc.flat()[k] += g.flat()[k];
  }
  for (double& v : acc.flat()) v /= samples;
  return acc;
}

/// Right Riemann sum of gradients on the straight path from `baseline` to
/// `x`, multiplied by (x - baseline).
inline Matrix integrated_gradients(const Model& model, const Matrix& x, ClassLabel c, int steps,
                                   const Matrix& baseline) {
  if (steps < 1) throw ConfigError("integrated gradients needs steps >= 1");
  require_same_shape(x, baseline, "integrated_gradients");
  Matrix acc(x.rows(), x.cols());
  Matrix xp(x.rows(), x.cols());
  for (int s = 1; s <= steps; ++s) {
    const double alpha = static_cast<double>(s) / steps;
    for (std::size_t k = 0; k < x.size(); ++k)
      xp.flat()[k] = baseline.flat()[k] + alpha * (x.flat()[k] - baseline.flat()[k]);
    const Matrix g = model.input_gradient(xp, c);
    for (std::size_t k = 0; k < acc.size(); ++k) acc.flat()[k] += g.flat()[k];
  }
  for (std::size_t k = 0; k < acc.size(); ++k)
    acc.flat()[k] = acc.flat()[k] / steps * (x.flat()[k] - baseline.flat()[k]);
  return acc;
}

/// Window start positions: every `stride` from 0, plus a final window flush
/// with the end when the stride grid leaves a tail uncovered.
inline std::vector<std::size_t> occlusion_windows(std::size_t length, std::size_t window,
                                                  std::size_t stride) {
  if (stride < 1) throw ConfigError("occlusion stride must be >= 1");
  if (window < 1 || window > length) throw ConfigError("occlusion window must be in [1, T]");
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window <= length; s += stride) starts.push_back(s);
  if (starts.back() + window < length) starts.push_back(length - window);
  return starts;
}

/// Drop of the class probability when a window (all channels) is replaced by
/// `fill`; the drop is written to covered cells and overlaps are averaged.
inline Matrix occlusion(const Model& model, const Matrix& x, ClassLabel c, std::size_t window,
                        std::size_t stride, const Matrix& fill) {
  require_same_shape(x, fill, "occlusion");
  const auto starts = occlusion_windows(x.cols(), window, stride);
  const std::size_t cls = static_cast<std::size_t>(c.index);
  const double base = model.probabilities(x)[cls];
  std::vector<double> sum(x.cols(), 0.0);
  std::vector<int> hits(x.cols(), 0);
  for (std::size_t s : starts) {
    Matrix xo = x;
    for (std::size_t h = 0; h < x.rows(); ++h)
      for (std::size_t t = s; t < s + window; ++t) xo(h, t) = fill(h, t);
    const double drop = base - model.probabilities(xo)[cls];
    for (std::size_t t = s; t < s + window; ++t) {
      sum[t] += drop;
      ++hits[t];
    }
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t h = 0; h < x.rows(); ++h)
    for (std::size_t t = 0; t < x.cols(); ++t) out(h, t) = hits[t] ? sum[t] / hits[t] : 0.0;
  return out;
}

/// Uniform noise in [0,1), independent of any model.
inline Matrix random_saliency(std::size_t channels, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix out(channels, length);
  for (double& v : out.flat()) v = u(rng);
  return out;
}

}  // namespace tsxai::reference
