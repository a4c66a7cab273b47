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

// The six scoring categories (faithfulness has two variants). Every score is
// oriented so that higher means a better visualization.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tsxai/core.hpp"
#include "tsxai/oracle.hpp"
#include "tsxai/similarity.hpp"

namespace tsxai {

/// One oracle connection per worker. Samples are split into contiguous
/// chunks and results are stored by sample index, so reductions do not
/// depend on the worker count.
class OraclePool {
 public:
  explicit OraclePool(Oracle& single) { ptrs_.push_back(&single); }
  OraclePool(const OracleFactory& factory, std::size_t workers) {
    for (std::size_t w = 0; w < std::max<std::size_t>(1, workers); ++w) {
      owned_.push_back(factory());
      ptrs_.push_back(owned_.back().get());
    }
  }

  std::size_t size() const { return ptrs_.size(); }
  Oracle& primary() const { return *ptrs_.front(); }

  /// fn(oracle, begin, end) for each chunk, one thread per chunk.
  template <class Fn>
  void run_chunks(std::size_t n, Fn&& fn) const {
    const std::size_t workers = std::min(ptrs_.size(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
      fn(*ptrs_.front(), std::size_t{0}, n);
      return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
      threads.emplace_back([&, w, begin, end] {
        try {
          fn(*ptrs_[w], begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  template <class Fn>
  void for_each_sample(std::size_t n, Fn&& fn) const {
    run_chunks(n, [&](Oracle& o, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) fn(o, i);
    });
  }

 private:
  std::vector<std::unique_ptr<Oracle>> owned_;
  std::vector<Oracle*> ptrs_;
};

enum class RankingMode { kRaw, kAbs };

struct SanityConfig {
  SsimConfig ssim;
  MapNormalization normalization = MapNormalization::kMinMax;
  std::uint64_t cascade_seed = 0;

  std::string canonical() const {
    std::ostringstream s;
    s << "ssim.window=" << ssim.window_len << ";ssim.k1=" << ssim.k1 << ";ssim.k2=" << ssim.k2
      << ";ssim.range=" << (ssim.dynamic_range_mode == DynamicRangeMode::kPerPair ? "per_pair" : "global")
      << ";normalization=" << static_cast<int>(normalization) << ";cascade_seed=" << cascade_seed;
    return s.str();
  }
};

struct FaithfulnessConfig {
  double fraction = 0.20;  // TI budget as a fraction of H*T cells
  int steps = 10;          // TI tranches
  std::size_t perturb_len = 0;  // TS window; 0 resolves to max(1, T/10)
  RankingMode ranking = RankingMode::kAbs;
  bool ts_all_channels = false;  // TS perturbs only the argmax channel by default

  std::size_t resolved_perturb_len(std::size_t length) const {
    return perturb_len ? perturb_len : std::max<std::size_t>(1, length / 10);
  }

  std::string canonical() const {
    std::ostringstream s;
    s << "fraction=" << fraction << ";steps=" << steps << ";perturb_len=" << perturb_len
      << ";ranking=" << (ranking == RankingMode::kRaw ? "raw" : "abs") << ";ts_all_channels=" << ts_all_channels;
    return s.str();
  }
};

enum class PerturbationMode { kSparse, kDense };

struct RobustnessConfig {
  double radius = 0.1;
  int mc_samples = 50;
  PerturbationMode mode = PerturbationMode::kSparse;
  bool relative = false;  // divide by ||M(X)||_F
  std::uint64_t seed = 0;

  std::string canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << "radius=" << radius << ";mc_samples=" << mc_samples
      << ";mode=" << (mode == PerturbationMode::kSparse ? "sparse" : "dense") << ";relative=" << relative
      << ";seed=" << seed;
    return s.str();
  }
};

struct StabilityConfig {
  DtwConfig dtw;

  std::string canonical() const {
    return "band_radius=" + (dtw.band_radius ? std::to_string(*dtw.band_radius) : std::string("none"));
  }
};

enum class PositionalBias { kFlat, kFront, kMiddle, kBack };
enum class CardinalityMode { kOne, kReciprocal };

inline std::string_view to_string(PositionalBias b) {
  switch (b) {
    case PositionalBias::kFlat: return "flat";
    case PositionalBias::kFront: return "front";
    case PositionalBias::kMiddle: return "middle";
    case PositionalBias::kBack: return "back";
  }
  return "?";
}

inline PositionalBias parse_bias(std::string_view s) {
  for (auto b : {PositionalBias::kFlat, PositionalBias::kFront, PositionalBias::kMiddle, PositionalBias::kBack})
    if (to_string(b) == s) return b;
  throw ConfigError("unknown positional bias '" + std::string(s) + "'");
}

struct LocalizationConfig {
  double theta = 0.5;
  double alpha = 0.0;
  CardinalityMode gamma = CardinalityMode::kOne;
  PositionalBias bias = PositionalBias::kFlat;

  void validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("localization theta must be in [0, 1]");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("localization alpha must be in [0, 1]");
  }

  std::string canonical() const {
    std::ostringstream s;
    s << "theta=" << theta << ";alpha=" << alpha << ";gamma=" << (gamma == CardinalityMode::kOne ? "one" : "reciprocal")
      << ";bias=" << to_string(bias);
    return s.str();
  }
};

namespace metrics_detail {

inline MetricScore make_score(MetricId id, const std::string& method, const Dataset& data,
                              const std::string& canonical) {
  MetricScore s;
  s.metric = id;
  s.method_id = method;
  s.dataset = data.name();
  s.config_digest = hex_digest(std::string(to_string(id)) + "|" + method + "|" + data.name() + "|" + canonical);
  return s;
}

/// Mean over finite entries; NaN marks failed items.
inline std::optional<double> finite_mean(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

inline MetricScore finish(MetricScore s) {
  const auto m = finite_mean(s.per_sample);
  if (!m) {
    s.status = ScoreStatus::kUnavailable;
    s.value = 0.0;
    if (s.warnings.empty()) s.warnings.push_back("no sample produced a score");
  } else {
    s.value = *m;
  }
  return s;
}

inline ClassLabel predicted_class(Oracle& o, const TimeSeriesSample& x) {
  return ClassLabel{argmax(o.predict(x).softmax)};
}

inline double class_probability(Oracle& o, const TimeSeriesSample& x, ClassLabel c) {
  return o.predict(x).softmax.at(static_cast<std::size_t>(c.index));
}

inline void require_fill(const Matrix& fill, const Dataset& data) {
  if (fill.rows() != data.channels() || fill.cols() != data.length())
    throw InvariantError("replacement statistics do not match the dataset shape");
}

}  // namespace metrics_detail

// ---------------------------------------------------------------------------
// Sanity

/// Cascading-randomization sanity score: per sample, the SSIM between the
/// trained-model map and the map after each randomization stage, averaged
/// over stages and negated; then averaged over samples. The oracle is reset
/// afterwards.
inline MetricScore sanity(const std::string& method, const OraclePool& pool, const Dataset& data,
                          const SanityConfig& cfg = {}, std::uint64_t saliency_seed = 0) {
  auto score = metrics_detail::make_score(MetricId::kSanity, method, data, cfg.canonical());
  cfg.ssim.validate(data.length());
  int layers = 0;
  try {
    layers = pool.primary().describe().layer_count;
  } catch (const OracleError& e) {
    return MetricScore::unavailable(MetricId::kSanity, method, data.name(), e.what());
  }
  if (layers < 1)
    return MetricScore::unavailable(MetricId::kSanity, method, data.name(), "backend exposes no layers to randomize");

  const std::size_t n = data.size();
  score.per_sample.assign(n, 0.0);
  std::vector<std::string> chunk_errors(pool.size());
  std::size_t chunk_index = 0;
  std::mutex mu;
  pool.run_chunks(n, [&](Oracle& o, std::size_t b, std::size_t e) {
    std::size_t me;
    {
      std::lock_guard<std::mutex> lock(mu);
      me = chunk_index++;
    }
    std::vector<Matrix> base(e - b);
    std::vector<ClassLabel> target(e - b);
    try {
      for (std::size_t i = b; i < e; ++i) {
        const auto& x = data.sample(i);
        target[i - b] = metrics_detail::predicted_class(o, x);
        auto m = o.saliency(x, target[i - b], method, saliency_seed);
        require_shape(m, x);
        base[i - b] = normalize_map(m.relevance, cfg.normalization);
      }
      auto session = o.begin_cascade(cfg.cascade_seed);
      for (int stage = 0; stage < layers; ++stage) {
        session = o.advance_cascade(session);
        for (std::size_t i = b; i < e; ++i) {
          const auto& x = data.sample(i);
          const auto m = o.saliency(x, target[i - b], method, saliency_seed);
          require_shape(m, x);
          score.per_sample[i] += ssim(base[i - b], normalize_map(m.relevance, cfg.normalization), cfg.ssim);
        }
      }
      o.reset();
      for (std::size_t i = b; i < e; ++i) score.per_sample[i] = -score.per_sample[i] / layers;
    } catch (const OracleError& err) {
      for (std::size_t i = b; i < e; ++i) score.per_sample[i] = std::nan("");
      chunk_errors[me] = err.what();
      try {
        o.reset();
      } catch (const OracleError&) {
      }
    }
  });
  for (const auto& err : chunk_errors)
    if (!err.empty()) score.warnings.push_back("cascade failed for some samples: " + err);
  return metrics_detail::finish(std::move(score));
}

// ---------------------------------------------------------------------------
// Faithfulness

/// Flat cell indices ordered by relevance, highest first; ties keep index
/// order.
inline std::vector<std::size_t> relevance_order(const Matrix& relevance, RankingMode mode) {
  std::vector<std::size_t> idx(relevance.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto key = [&](std::size_t k) {
    const double v = relevance.flat()[k];
    return mode == RankingMode::kAbs ? std::fabs(v) : v;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
  return idx;
}

/// Cumulative number of perturbed cells after each of `steps` tranches
/// (index 0 is the unperturbed sample).
inline std::vector<std::size_t> ti_schedule(std::size_t cells, double fraction, int steps) {
  if (steps < 1) throw ConfigError("faithfulness steps must be >= 1");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("faithfulness fraction must be in (0, 1]");
  const double budget = fraction * static_cast<double>(cells);
  if (budget < 1.0) throw ConfigError("faithfulness fraction * H * T is below one cell");
  const auto total = static_cast<std::size_t>(std::ceil(budget - 1e-12));
  std::vector<std::size_t> k(static_cast<std::size_t>(steps) + 1, 0);
  for (int l = 1; l <= steps; ++l)
    k[static_cast<std::size_t>(l)] = (static_cast<std::size_t>(l) * total + static_cast<std::size_t>(steps) - 1) /
                                     static_cast<std::size_t>(steps);
  return k;
}

/// Trapezoid area under the per-step probability curve, divided by the
/// number of steps.
inline double normalized_auc(const std::vector<double>& curve) {
  double area = 0.0;
  for (std::size_t l = 1; l < curve.size(); ++l) area += 0.5 * (curve[l - 1] + curve[l]);
  return area / static_cast<double>(curve.size() - 1);
}

/// TI curve for one sample: target probability after each tranche.
inline std::vector<double> ti_curve(Oracle& o, const TimeSeriesSample& x, ClassLabel target,
                                    const Matrix& relevance, const Matrix& fill, const FaithfulnessConfig& cfg) {
  const auto schedule = ti_schedule(relevance.size(), cfg.fraction, cfg.steps);
  const auto order = relevance_order(relevance, cfg.ranking);
  std::vector<double> curve(schedule.size());
  curve[0] = metrics_detail::class_probability(o, x, target);
  Matrix xp = x.values();
  std::size_t done = 0;
  for (std::size_t l = 1; l < schedule.size(); ++l) {
    if (schedule[l] == done) {
      curve[l] = curve[l - 1];
      continue;
    }
    for (; done < schedule[l]; ++done) xp.flat()[order[done]] = fill.flat()[order[done]];
    curve[l] = metrics_detail::class_probability(o, x.with_values(xp), target);
  }
  return curve;
}

/// Faithfulness via temporal importance: negated mean normalized AUC of the
/// target softmax while top-relevance cells are replaced by the dataset mean.
inline MetricScore faithfulness_ti(const std::string& method, const OraclePool& pool, const Dataset& data,
                                   const Matrix& fill, const FaithfulnessConfig& cfg = {},
                                   std::uint64_t saliency_seed = 0) {
  auto score = metrics_detail::make_score(MetricId::kFaithfulnessTi, method, data, cfg.canonical());
  metrics_detail::require_fill(fill, data);
  ti_schedule(data.channels() * data.length(), cfg.fraction, cfg.steps);
  score.per_sample.assign(data.size(), 0.0);
  pool.for_each_sample(data.size(), [&](Oracle& o, std::size_t i) {
    const auto& x = data.sample(i);
    const ClassLabel c = metrics_detail::predicted_class(o, x);
    const auto m = o.saliency(x, c, method, saliency_seed);
    require_shape(m, x);
    score.per_sample[i] = -normalized_auc(ti_curve(o, x, c, m.relevance, fill, cfg));
  });
  return metrics_detail::finish(std::move(score));
}

struct TsWindow {
  std::size_t channel = 0;
  std::size_t center = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
};

/// Window of `len` steps around the relevance argmax: [t* - len/2,
/// t* - len/2 + len) clipped to the series, so even lengths put the extra
/// step on the past side.
inline TsWindow ts_window(const Matrix& relevance, std::size_t len, RankingMode mode) {
  if (len < 1 || len > relevance.cols()) throw ConfigError("perturb_len must be in [1, T]");
  const std::size_t best = relevance_order(relevance, mode).front();
  TsWindow w;
  w.channel = best / relevance.cols();
  w.center = best % relevance.cols();
  const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(w.center) - static_cast<std::ptrdiff_t>(len / 2);
  w.start = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, start));
  w.end = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(relevance.cols()), start + static_cast<std::ptrdiff_t>(len)));
  return w;
}

/// Faithfulness via a temporal sub-sequence: mean drop of the target softmax
/// when the window around the relevance argmax is replaced by the mean.
inline MetricScore faithfulness_ts(const std::string& method, const OraclePool& pool, const Dataset& data,
                                   const Matrix& fill, const FaithfulnessConfig& cfg = {},
                                   std::uint64_t saliency_seed = 0) {
  auto score = metrics_detail::make_score(MetricId::kFaithfulnessTs, method, data, cfg.canonical());
  metrics_detail::require_fill(fill, data);
  const std::size_t len = cfg.resolved_perturb_len(data.length());
  if (len > data.length()) throw ConfigError("perturb_len must be <= T");
  score.per_sample.assign(data.size(), 0.0);
  pool.for_each_sample(data.size(), [&](Oracle& o, std::size_t i) {
    const auto& x = data.sample(i);
    const ClassLabel c = metrics_detail::predicted_class(o, x);
    const auto m = o.saliency(x, c, method, saliency_seed);
    require_shape(m, x);
    const TsWindow w = ts_window(m.relevance, len, cfg.ranking);
    Matrix xp = x.values();
    for (std::size_t h = 0; h < xp.rows(); ++h) {
      if (!cfg.ts_all_channels && h != w.channel) continue;
      for (std::size_t t = w.start; t < w.end; ++t) xp(h, t) = fill(h, t);
    }
    score.per_sample[i] = metrics_detail::class_probability(o, x, c) -
                          metrics_detail::class_probability(o, x.with_values(std::move(xp)), c);
  });
  return metrics_detail::finish(std::move(score));
}

// ---------------------------------------------------------------------------
// Inter-class sensitivity

/// Negated mean cosine similarity between the maps of the most and least
/// likely predicted classes.
inline MetricScore inter_class_sensitivity(const std::string& method, const OraclePool& pool, const Dataset& data,
                                           std::uint64_t saliency_seed = 0) {
  auto score = metrics_detail::make_score(MetricId::kSensitivity, method, data, "cosine");
  score.per_sample.assign(data.size(), 0.0);
  std::vector<char> degenerate(data.size(), 0);
  pool.for_each_sample(data.size(), [&](Oracle& o, std::size_t i) {
    const auto& x = data.sample(i);
    const auto p = o.predict(x).softmax;
    const int cmax = argmax(p);
    int cmin = argmin(p);
    if (cmin == cmax) cmin = (cmax + 1) % static_cast<int>(p.size());
    const auto a = o.saliency(x, ClassLabel{cmax}, method, saliency_seed);
    const auto b = o.saliency(x, ClassLabel{cmin}, method, saliency_seed);
    require_shape(a, x);
    require_shape(b, x);
    const auto cos = cosine_similarity_checked(a.relevance, b.relevance);
    degenerate[i] = cos.degenerate;
    score.per_sample[i] = -cos.value;
  });
  const auto zeros = std::count(degenerate.begin(), degenerate.end(), 1);
  if (zeros > 0)
    score.warnings.push_back(std::to_string(zeros) + " sample(s) had two all-zero maps; counted as similarity 0");
  return metrics_detail::finish(std::move(score));
}

// ---------------------------------------------------------------------------
// Robustness

/// Draws the perturbations used for one sample. Sparse mode adds eps * e_j at
/// a uniformly chosen coordinate j; dense mode perturbs every coordinate. In
/// both, |eps| < radius, and eps = radius * u with u drawn independently of
/// the radius, so fixed seeds compare equal draws across radii.
inline std::vector<Matrix> robustness_perturbations(const Matrix& x, const RobustnessConfig& cfg,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> coord(0, x.size() - 1);
  auto draw = [&] {
    double v;
    do v = u(rng);
    while (v <= -1.0);
    return v;
  };
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(cfg.mc_samples));
  for (int k = 0; k < cfg.mc_samples; ++k) {
    Matrix xp = x;
    if (cfg.mode == PerturbationMode::kSparse) {
      const std::size_t j = coord(rng);
      xp.flat()[j] += cfg.radius * draw();
    } else {
      for (double& v : xp.flat()) v += cfg.radius * draw();
    }
    out.push_back(std::move(xp));
  }
  return out;
}

/// Max-sensitivity: negated mean over samples of the largest Frobenius
/// change of the predicted-class map under Monte Carlo perturbations.
inline MetricScore robustness(const std::string& method, const OraclePool& pool, const Dataset& data,
                              const RobustnessConfig& cfg = {}, std::uint64_t saliency_seed = 0) {
  auto score = metrics_detail::make_score(MetricId::kRobustness, method, data, cfg.canonical());
  if (cfg.mc_samples < 1) throw ConfigError("robustness mc_samples must be >= 1");
  if (!(cfg.radius > 0.0)) throw ConfigError("robustness radius must be > 0");
  score.per_sample.assign(data.size(), 0.0);
  pool.for_each_sample(data.size(), [&](Oracle& o, std::size_t i) {
    const auto& x = data.sample(i);
    const ClassLabel c = metrics_detail::predicted_class(o, x);
    const auto base = o.saliency(x, c, method, saliency_seed);
    require_shape(base, x);
    const double base_norm = frobenius_norm(base.relevance);
    double worst = 0.0;
    for (auto& xp : robustness_perturbations(x.values(), cfg, mix_seed(cfg.seed, fnv1a(x.id())))) {
      const auto m = o.saliency(x.with_values(std::move(xp)), c, method, saliency_seed);
      require_shape(m, x);
      Matrix diff = m.relevance;
      for (std::size_t k = 0; k < diff.size(); ++k) diff.flat()[k] -= base.relevance.flat()[k];
      double d = frobenius_norm(diff);
      if (cfg.relative && base_norm > 0.0) d /= base_norm;
      worst = std::max(worst, d);
    }
    score.per_sample[i] = -worst;
  });
  return metrics_detail::finish(std::move(score));
}

// ---------------------------------------------------------------------------
// Intra-class stability

/// Per class with N_c >= 2 samples: s_c = sum_{i<j} dtw(M_i, M_j) / (N_c (N_c - 1)),
/// which is half the mean pairwise distance. Classes are combined weighted by
/// their pair counts and the result is negated.
inline double stability_from_maps(const std::vector<Matrix>& maps, const std::vector<ClassLabel>& labels,
                                  const DtwConfig& dtw, std::vector<std::string>* warnings = nullptr,
                                  std::map<std::string, double>* per_class = nullptr) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i].index].push_back(i);
  double weighted = 0.0, weights = 0.0;
  for (const auto& [cls, idx] : groups) {
    const double n = static_cast<double>(idx.size());
    if (idx.size() < 2) {
      if (warnings) warnings->push_back("class " + std::to_string(cls) + " has a single sample; excluded");
      continue;
    }
    double sum = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) sum += dtw_distance(maps[idx[a]], maps[idx[b]], dtw);
    const double s = sum / (n * (n - 1.0));
    const double pairs = n * (n - 1.0) / 2.0;
    weighted += pairs * s;
    weights += pairs;
    if (per_class) (*per_class)["class_" + std::to_string(cls)] = -s;
  }
  if (weights == 0.0) return std::nan("");
  return -weighted / weights;
}

inline MetricScore intra_class_stability(const std::string& method, const OraclePool& pool, const Dataset& data,
                                         const StabilityConfig& cfg = {}, std::uint64_t saliency_seed = 0) {
  auto score = metrics_detail::make_score(MetricId::kStability, method, data, cfg.canonical());
  std::vector<Matrix> maps(data.size());
  std::vector<ClassLabel> labels(data.size());
  pool.for_each_sample(data.size(), [&](Oracle& o, std::size_t i) {
    const auto& x = data.sample(i);
    labels[i] = data.sample_class(i);
    auto m = o.saliency(x, labels[i], method, saliency_seed);
    require_shape(m, x);
    maps[i] = std::move(m.relevance);
  });
  const double v = stability_from_maps(maps, labels, cfg.dtw, &score.warnings, &score.diagnostics);
  if (!std::isfinite(v))
    return MetricScore::unavailable(MetricId::kStability, method, data.name(), "no class has two or more samples");
  score.value = v;
  return score;
}

// ---------------------------------------------------------------------------
// Localization

/// Positional weight of offset `p` inside a segment of length `n`.
inline double positional_weight(std::size_t p, std::size_t n, PositionalBias bias) {
  switch (bias) {
    case PositionalBias::kFlat: return 1.0;
    case PositionalBias::kFront: return static_cast<double>(n - p);
    case PositionalBias::kBack: return static_cast<double>(p + 1);
    case PositionalBias::kMiddle:
      return 2 * (p + 1) <= n ? static_cast<double>(p + 1) : static_cast<double>(n - p);
  }
  return 1.0;
}

/// Keeps the predicted class at steps where some channel's relevance exceeds
/// max|r| * theta; other steps become `none`.
inline DenseLabels relevancy_filter(const std::vector<int>& predicted, const Matrix& relevance, double theta) {
  if (predicted.size() != relevance.cols()) throw InvariantError("prediction length differs from the map");
  double peak = 0.0;
  for (double v : relevance.flat()) peak = std::max(peak, std::fabs(v));
  const double threshold = peak * theta;
  DenseLabels out(predicted.size());
  for (std::size_t t = 0; t < relevance.cols(); ++t)
    for (std::size_t h = 0; h < relevance.rows(); ++h)
      if (relevance(h, t) > threshold) {
        out[t] = predicted[t];
        break;
      }
  return out;
}

/// Range-based recall of one labeled segment against a relevancy-filtered
/// prediction: alpha * existence + (1 - alpha) * cardinality * sum_j omega.
inline double segment_recall(const LabeledSegment& seg, const DenseLabels& filtered, const LocalizationConfig& cfg) {
  if (seg.end > filtered.size() || seg.start >= seg.end) throw InvariantError("segment outside the prediction");
  const int cls = seg.label.index;
  const std::size_t n = seg.length();
  double hit_weight = 0.0, total_weight = 0.0;
  bool any = false;
  for (std::size_t t = seg.start; t < seg.end; ++t) {
    const double w = positional_weight(t - seg.start, n, cfg.bias);
    total_weight += w;
    if (filtered[t] == cls) {
      hit_weight += w;
      any = true;
    }
  }
  // Predicted ranges of this class that touch the segment.
  std::size_t ranges = 0;
  for (std::size_t t = seg.start; t < seg.end; ++t)
    if (filtered[t] == cls && (t == seg.start || filtered[t - 1] != cls)) ++ranges;
  double cardinality = 1.0;
  if (ranges > 1 && cfg.gamma == CardinalityMode::kReciprocal) cardinality = 1.0 / static_cast<double>(ranges);
  const double existence = any ? 1.0 : 0.0;
  const double overlap = cardinality * hit_weight / total_weight;
  return cfg.alpha * existence + (1.0 - cfg.alpha) * overlap;
}

/// Mean range recall over every labeled segment of a segmentation dataset.
/// Each segment is compared against the prediction filtered by the map of
/// the segment's class.
inline MetricScore localization(const std::string& method, const OraclePool& pool, const Dataset& data,
                                const LocalizationConfig& cfg = {}, std::uint64_t saliency_seed = 0) {
  cfg.validate();
  auto score = metrics_detail::make_score(MetricId::kLocalization, method, data, cfg.canonical());
  if (data.task_kind() != TaskKind::kSegmentation)
    return MetricScore::unavailable(MetricId::kLocalization, method, data.name(),
                                    "localization needs a segmentation dataset");
  const std::size_t n = data.size();
  std::vector<std::vector<double>> recalls(n);
  std::vector<std::size_t> inside(n, 0), outside(n, 0);
  std::vector<std::string> missing(n);
  pool.for_each_sample(n, [&](Oracle& o, std::size_t i) {
    const auto& x = data.sample(i);
    const auto pred = o.predict(x);
    if (!pred.dense_softmax) {
      missing[i] = "backend does not report per-step predictions";
      return;
    }
    std::vector<int> classes(x.length());
    for (std::size_t t = 0; t < x.length(); ++t) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < pred.dense_softmax->rows(); ++c)
        if ((*pred.dense_softmax)(c, t) > (*pred.dense_softmax)(best, t)) best = c;
      classes[t] = static_cast<int>(best);
    }
    const auto& labels = data.dense_labels()[i];
    std::map<int, DenseLabels> filtered_by_class;
    for (const auto& seg : segments_from_dense(labels)) {
      auto it = filtered_by_class.find(seg.label.index);
      if (it == filtered_by_class.end()) {
        const auto m = o.saliency(x, seg.label, method, saliency_seed);
        require_shape(m, x);
        auto f = relevancy_filter(classes, m.relevance, cfg.theta);
        for (std::size_t t = 0; t < f.size(); ++t)
          if (f[t]) ++(labels[t] ? inside[i] : outside[i]);
        it = filtered_by_class.emplace(seg.label.index, std::move(f)).first;
      }
      recalls[i].push_back(segment_recall(seg, it->second, cfg));
    }
  });
  for (const auto& m : missing)
    if (!m.empty()) return MetricScore::unavailable(MetricId::kLocalization, method, data.name(), m);
  for (const auto& r : recalls) score.per_sample.insert(score.per_sample.end(), r.begin(), r.end());
  if (score.per_sample.empty())
    return MetricScore::unavailable(MetricId::kLocalization, method, data.name(), "dataset has no labeled segments");
  const double in = static_cast<double>(std::accumulate(inside.begin(), inside.end(), std::size_t{0}));
  const double out = static_cast<double>(std::accumulate(outside.begin(), outside.end(), std::size_t{0}));
  score.diagnostics["outside_mass"] = in + out > 0.0 ? out / (in + out) : 0.0;
  return metrics_detail::finish(std::move(score));
}

// ---------------------------------------------------------------------------

/// Every per-metric configuration plus the shared seeds.
struct MetricSuiteConfig {
  SanityConfig sanity;
  FaithfulnessConfig faithfulness;
  RobustnessConfig robustness;
  StabilityConfig stability;
  LocalizationConfig localization;
  std::uint64_t saliency_seed = 0;
};

/// Runs one metric; task mismatches and unsupported backends yield an
/// `unavailable` score rather than an exception.
inline MetricScore evaluate_metric(MetricId id, const std::string& method, const OraclePool& pool,
                                   const Dataset& data, const Matrix& fill, const MetricSuiteConfig& cfg) {
  try {
    switch (id) {
      case MetricId::kSanity: return sanity(method, pool, data, cfg.sanity, cfg.saliency_seed);
      case MetricId::kFaithfulnessTi: return faithfulness_ti(method, pool, data, fill, cfg.faithfulness, cfg.saliency_seed);
      case MetricId::kFaithfulnessTs: return faithfulness_ts(method, pool, data, fill, cfg.faithfulness, cfg.saliency_seed);
      case MetricId::kSensitivity: return inter_class_sensitivity(method, pool, data, cfg.saliency_seed);
      case MetricId::kRobustness: return robustness(method, pool, data, cfg.robustness, cfg.saliency_seed);
      case MetricId::kStability: return intra_class_stability(method, pool, data, cfg.stability, cfg.saliency_seed);
      case MetricId::kLocalization: return localization(method, pool, data, cfg.localization, cfg.saliency_seed);
    }
  } catch (const OracleError& e) {
    return MetricScore::unavailable(id, method, data.name(), e.what());
  }
  return MetricScore::unavailable(id, method, data.name(), "unknown metric");
}

}  // namespace tsxai
