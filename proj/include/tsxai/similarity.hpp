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

// Comparison kernels: 1-D multichannel SSIM, cosine similarity and
// dependent multivariate DTW.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tsxai/core.hpp"

namespace tsxai {

enum class DynamicRangeMode { kPerPair, kGlobal };

struct SsimConfig {
  std::size_t window_len = 11;  // odd, >= 3
  double k1 = 0.01;
  double k2 = 0.03;
  DynamicRangeMode dynamic_range_mode = DynamicRangeMode::kPerPair;
  double global_range = 1.0;  // used when dynamic_range_mode == kGlobal

  void validate(std::size_t length) const {
    if (window_len < 3 || window_len % 2 == 0)
      throw ConfigError("ssim window_len must be odd and >= 3");
    if (window_len > length)
      throw ConfigError("ssim window_len " + std::to_string(window_len) +
                        " exceeds series length " + std::to_string(length));
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw ConfigError("ssim k1, k2 must be positive");
    if (dynamic_range_mode == DynamicRangeMode::kGlobal && !(global_range > 0.0))
      throw ConfigError("ssim global_range must be positive");
  }
};

/// Pre-processing applied to saliency before SSIM.
enum class MapNormalization { kRaw, kAbs, kMinMax };

/// kMinMax rescales to [0,1]; a constant map becomes all zeros.
inline Matrix normalize_map(const Matrix& m, MapNormalization mode) {
  Matrix out = m;
  if (mode == MapNormalization::kRaw) return out;
  if (mode == MapNormalization::kAbs) {
    for (double& v : out.flat()) v = std::fabs(v);
    return out;
  }
  const auto [lo, hi] = std::minmax_element(m.flat().begin(), m.flat().end());
  const double range = *hi - *lo;
  for (double& v : out.flat()) v = range > 0.0 ? (v - *lo) / range : 0.0;
  return out;
}

/// Mean SSIM over all channels and all full sliding windows along time.
inline double ssim(const Matrix& a, const Matrix& b, const SsimConfig& cfg = {}) {
  require_same_shape(a, b, "ssim");
  cfg.validate(a.cols());

  double range = cfg.global_range;
  if (cfg.dynamic_range_mode == DynamicRangeMode::kPerPair) {
    const auto [alo, ahi] = std::minmax_element(a.flat().begin(), a.flat().end());
    const auto [blo, bhi] = std::minmax_element(b.flat().begin(), b.flat().end());
    range = std::max(*ahi, *bhi) - std::min(*alo, *blo);
    // Zero joint range means both maps are the same constant.
    if (range == 0.0) return 1.0;
  }
  const double c1 = (cfg.k1 * range) * (cfg.k1 * range);
  const double c2 = (cfg.k2 * range) * (cfg.k2 * range);
  const std::size_t w = cfg.window_len;
  const double n = static_cast<double>(w);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t ch = 0; ch < a.rows(); ++ch) {
    const auto ra = a.row(ch);
    const auto rb = b.row(ch);
    for (std::size_t start = 0; start + w <= a.cols(); ++start) {
      double ma = 0.0, mb = 0.0;
      for (std::size_t k = start; k < start + w; ++k) {
        ma += ra[k];
        mb += rb[k];
      }
      ma /= n;
      mb /= n;
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (std::size_t k = start; k < start + w; ++k) {
        const double da = ra[k] - ma;
        const double db = rb[k] - mb;
        va += da * da;
        vb += db * db;
        cov += da * db;
      }
      va /= n;
      vb /= n;
      cov /= n;
      const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
      const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

inline double ssim(const SaliencyMap& a, const SaliencyMap& b, const SsimConfig& cfg = {}) {
  return ssim(a.relevance, b.relevance, cfg);
}

struct CosineResult {
  double value = 0.0;
  bool degenerate = false;  // both inputs had zero norm
};

/// Cosine of the flattened maps. When exactly one map is zero the result is 0;
/// when both are, it is 0 with `degenerate` set.
inline CosineResult cosine_similarity_checked(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "cosine_similarity");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a.flat()[k] * b.flat()[k];
    na += a.flat()[k] * a.flat()[k];
    nb += b.flat()[k] * b.flat()[k];
  }
  if (na == 0.0 && nb == 0.0) return {0.0, true};
  if (na == 0.0 || nb == 0.0) return {0.0, false};
  const double prod = na * nb;
  const double denom = std::isnormal(prod) ? std::sqrt(prod) : std::sqrt(na) * std::sqrt(nb);
  const double c = dot / denom;
  return {std::clamp(c, -1.0, 1.0), false};
}

inline double cosine_similarity(const Matrix& a, const Matrix& b) {
  return cosine_similarity_checked(a, b).value;
}

inline double cosine_similarity(const SaliencyMap& a, const SaliencyMap& b) {
  return cosine_similarity(a.relevance, b.relevance);
}

struct DtwConfig {
  std::optional<std::size_t> band_radius;  // Sakoe-Chiba |i - j| <= radius
};

/// Euclidean distance between column `i` of `a` and column `j` of `b`.
inline double column_distance(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t h = 0; h < a.rows(); ++h) {
    const double d = a(h, i) - b(h, j);
    s += d * d;
  }
  return std::sqrt(s);
}

/// Dependent multivariate DTW with steps {match, insert, delete}; raw
/// accumulated cost without path-length normalization.
inline double dtw_distance(const Matrix& a, const Matrix& b, const DtwConfig& cfg = {}) {
  if (a.rows() != b.rows()) throw InvariantError("dtw: channel count mismatch");
  const std::size_t ta = a.cols();
  const std::size_t tb = b.cols();
  if (ta == 0 || tb == 0) throw InvariantError("dtw: empty series");
  const std::size_t diff = ta > tb ? ta - tb : tb - ta;
  if (cfg.band_radius) {
    if (*cfg.band_radius < 1) throw ConfigError("dtw band_radius must be >= 1");
    if (*cfg.band_radius < diff)
      throw ConfigError("dtw band_radius " + std::to_string(*cfg.band_radius) +
                        " is narrower than the length difference " + std::to_string(diff));
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(tb, kInf), curr(tb, kInf);
  for (std::size_t i = 0; i < ta; ++i) {
    std::size_t lo = 0, hi = tb - 1;
    if (cfg.band_radius) {
      const std::size_t r = *cfg.band_radius;
      lo = i > r ? i - r : 0;
      hi = std::min(tb - 1, i + r);
    }
    std::fill(curr.begin(), curr.end(), kInf);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = column_distance(a, i, b, j);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0) best = std::min(best, prev[j]);
        if (j > 0) best = std::min(best, curr[j - 1]);
        if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      }
      curr[j] = cost + best;
    }
    std::swap(prev, curr);
  }
  return prev[tb - 1];
}

inline double dtw_distance(const SaliencyMap& a, const SaliencyMap& b, const DtwConfig& cfg = {}) {
  return dtw_distance(a.relevance, b.relevance, cfg);
}

}  // namespace tsxai
