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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fakes.hpp"
#include "tsxai/evaluate.hpp"
#include "tsxai/metrics.hpp"
#include "tsxai/reference/model.hpp"
#include "tsxai/reference/oracle.hpp"
#include "tsxai/report.hpp"
#include "tsxai/similarity.hpp"

namespace {

using namespace tsxai;
using testing::binary;
using testing::FakeOracle;
using testing::random_matrix;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Dataset labeled(std::vector<Matrix> xs, const std::vector<int>& labels, int classes) {
  std::vector<TimeSeriesSample> s;
  std::vector<ClassLabel> l;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s.emplace_back(std::move(xs[i]), "a" + std::to_string(i));
    l.push_back(ClassLabel{labels[i]});
  }
  return Dataset::classification("fixture", std::move(s), std::move(l), classes);
}

Matrix keyed_noise(const TimeSeriesSample& s) {
  std::mt19937_64 rng(fnv1a(s.id()));
  return random_matrix(s.channels(), s.length(), rng, 0.0, 1.0);
}

const MetricScore& lookup(const ScoreTable& t, MetricId m, const std::string& method, const std::string& dataset) {
  const auto* e = t.find({m, method, dataset, "trained"});
  if (!e) throw InvariantError("missing score " + std::string(to_string(m)) + "/" + method);
  return *e;
}

// ---------------------------------------------------------------------------

double weighted_logits(const reference::Model& m, const Matrix& x, const Matrix& g) {
  const Matrix z = m.logits(x);
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) s += g.flat()[k] * z.flat()[k];
  return s;
}

Outcome gradient_oracle() {
  constexpr double kStep = 1e-3, kTol = 1e-4;
  Outcome out;
  const auto t0 = Clock::now();
  std::size_t cases = 0, cells = 0;
  double worst = 0.0;
  auto check = [&](double fd, double an) {
    const double rel = std::fabs(fd - an) / std::max(1.0, std::fabs(an));
    worst = std::max(worst, rel);
    ++cells;
  };
  for (std::uint64_t seed = 0; seed < 6; ++seed)
    for (TaskKind task : {TaskKind::kClassification, TaskKind::kSegmentation})
      for (std::size_t h : {1u, 3u}) {
        reference::ConvNetConfig cfg;
        cfg.channels = h;
        cfg.length = 12 + seed;
        cfg.num_classes = 2 + static_cast<int>(seed % 2);
        cfg.task = task;
        cfg.kernel1 = seed % 2 ? 3 : 5;
        cfg.kernel2 = 3;
        cfg.filters1 = 4;
        cfg.filters2 = 3;
        cfg.seed = seed;
        reference::ConvNet net(cfg);
        std::mt19937_64 rng(seed * 31 + h);
        const Matrix x = random_matrix(h, cfg.length, rng, -2.0, 2.0);
        const Matrix g = random_matrix(static_cast<std::size_t>(cfg.num_classes),
                                       task == TaskKind::kClassification ? 1 : cfg.length, rng);
        std::vector<reference::ParamLayer> grads;
        Matrix dx;
        net.backward(x, g, &grads, &dx);
        const auto pattern = net.activation_pattern(x);
        for (std::size_t k = 0; k < x.size(); ++k) {
          Matrix xp = x, xm = x;
          xp.flat()[k] += kStep;
          xm.flat()[k] -= kStep;
          if (net.activation_pattern(xp) != pattern || net.activation_pattern(xm) != pattern) continue;
          check((weighted_logits(net, xp, g) - weighted_logits(net, xm, g)) / (2 * kStep), dx.flat()[k]);
        }
        for (std::size_t l = 0; l < grads.size(); ++l)
          for (auto [values, analytic] : {std::pair{&net.layers()[l].weights, &grads[l].weights},
                                          std::pair{&net.layers()[l].bias, &grads[l].bias}})
            for (std::size_t k = 0; k < values->size(); ++k) {
              const double orig = (*values)[k];
              (*values)[k] = orig + kStep;
              const double fp = weighted_logits(net, x, g);
              const bool same_p = net.activation_pattern(x) == pattern;
              (*values)[k] = orig - kStep;
              const double fm = weighted_logits(net, x, g);
              const bool same_m = net.activation_pattern(x) == pattern;
              (*values)[k] = orig;
              if (same_p && same_m) check((fp - fm) / (2 * kStep), (*analytic)[k]);
            }
        ++cases;
      }
  // Linear model: the input gradient is the weight row.
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> rows(3);
  for (auto& r : rows) {
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 20; ++k) r.push_back(u(rng));
  }
  const auto lin = reference::LinearModel::from_weights(2, 10, rows);
  const Matrix x = random_matrix(2, 10, rng);
  for (int c = 0; c < 3; ++c) {
    const Matrix gsal = reference::gradient_saliency(lin, x, ClassLabel{c});
    for (std::size_t k = 0; k < x.size(); ++k) check(rows[static_cast<std::size_t>(c)][k], gsal.flat()[k]);
  }
  ++cases;
  const double secs = seconds_since(t0);
  out.require(cases >= 20, "only " + std::to_string(cases) + " cases");
  out.require(worst <= kTol, "max relative error " + fmt(worst));
  out.require(secs < 10.0, "took " + fmt(secs) + " s");
  if (out.ok)
    out.detail = std::to_string(cases) + " cases, " + std::to_string(cells) + " entries, max rel err " + fmt(worst, 3) +
                 ", " + fmt(secs, 3) + " s";
  return out;
}

// ---------------------------------------------------------------------------

double memo_dtw(const Matrix& a, const Matrix& b) {
  std::map<std::pair<long, long>, double> memo;
  std::function<double(long, long)> d = [&](long i, long j) -> double {
    if (i < 0 || j < 0) return std::numeric_limits<double>::infinity();
    double c = 0.0;
    for (std::size_t h = 0; h < a.rows(); ++h) {
      const double diff = a(h, static_cast<std::size_t>(i)) - b(h, static_cast<std::size_t>(j));
      c += diff * diff;
    }
    c = std::sqrt(c);
    if (i == 0 && j == 0) return c;
    if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
    const double v = c + std::min({d(i - 1, j), d(i, j - 1), d(i - 1, j - 1)});
    memo[{i, j}] = v;
    return v;
  };
  return d(static_cast<long>(a.cols()) - 1, static_cast<long>(b.cols()) - 1);
}

Outcome dtw_exactness() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> rows(1, 2), cols(1, 16);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = rows(rng);
    const Matrix a = random_matrix(h, cols(rng), rng, -3.0, 3.0);
    const Matrix b = random_matrix(h, cols(rng), rng, -3.0, 3.0);
    const double engine = dtw_distance(a, b), oracle = memo_dtw(a, b);
    out.require(engine == oracle, "trial " + std::to_string(trial) + ": " + fmt(engine, 17) + " vs " + fmt(oracle, 17));
  }
  const double secs = seconds_since(t0);
  out.require(secs < 30.0, "took " + fmt(secs) + " s");
  if (out.ok) out.detail = "200 pairs exact, " + fmt(secs, 3) + " s";
  return out;
}

// ---------------------------------------------------------------------------

Outcome ssim_identities() {
  Outcome out;
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(1 + trial % 3, 16 + trial, rng);
    const Matrix b = random_matrix(a.rows(), a.cols(), rng);
    out.require(std::fabs(ssim(a, a) - 1.0) <= 1e-9, "ssim(a,a) = " + fmt(ssim(a, a), 17));
    out.require(std::fabs(ssim(a, b) - ssim(b, a)) <= 1e-9, "asymmetric on trial " + std::to_string(trial));
  }
  constexpr std::size_t kPeriod = 11, kLength = 44;
  Matrix a(1, kLength), b(1, kLength);
  double peak = 0.0;
  for (std::size_t t = 0; t < kLength; ++t) {
    a(0, t) = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / kPeriod);
    b(0, t) = -a(0, t);
    peak = std::max(peak, std::fabs(a(0, t)));
  }
  // Per window: zero means, equal variances, covariance -var.
  const double c2 = std::pow(0.03 * 2.0 * peak, 2.0);
  const double expected = (c2 - 1.0) / (c2 + 1.0);
  const double got = ssim(a, b);
  out.require(std::fabs(got - expected) <= 1e-9, "antipodal " + fmt(got, 17) + " vs " + fmt(expected, 17));
  if (out.ok) out.detail = "antipodal " + fmt(got, 12);
  return out;
}

// ---------------------------------------------------------------------------

DenseLabels hit_range(std::size_t length, std::size_t lo, std::size_t hi, int cls) {
  DenseLabels out(length);
  for (std::size_t t = lo; t < hi; ++t) out[t] = cls;
  return out;
}

Outcome localization_fixtures() {
  Outcome out;
  const LabeledSegment seg{ClassLabel{1}, 0, 10};
  const auto half = hit_range(12, 0, 5, 1);
  const std::pair<PositionalBias, double> cases[] = {
      {PositionalBias::kFlat, 0.5}, {PositionalBias::kFront, 40.0 / 55.0}, {PositionalBias::kBack, 15.0 / 55.0}};
  for (auto [bias, expected] : cases) {
    LocalizationConfig cfg;
    cfg.bias = bias;
    const double got = segment_recall(seg, half, cfg);
    out.require(std::fabs(got - expected) <= 1e-12, std::string(to_string(bias)) + " gave " + fmt(got, 17));
  }
  for (auto bias : {PositionalBias::kFlat, PositionalBias::kFront, PositionalBias::kMiddle, PositionalBias::kBack}) {
    LocalizationConfig cfg;
    cfg.bias = bias;
    out.require(segment_recall(seg, hit_range(12, 0, 10, 1), cfg) == 1.0, "full coverage not 1");
    out.require(segment_recall(seg, hit_range(12, 0, 10, 0), cfg) == 0.0, "misclassified not 0");
  }
  // End to end: a segmenter predicting the wrong class everywhere.
  const std::size_t kT = 12;
  std::vector<TimeSeriesSample> s;
  std::vector<DenseLabels> labels;
  for (int i = 0; i < 3; ++i) {
    s.emplace_back(Matrix(1, kT, 1.0), "s" + std::to_string(i));
    labels.push_back(hit_range(kT, 2, 8, i % 2 + 1));
  }
  const auto data = Dataset::segmentation("seg", std::move(s), std::move(labels), 3);
  auto wrong = [=](const Matrix&) {
    Matrix d(3, kT, 0.0);
    for (std::size_t t = 0; t < kT; ++t) d(0, t) = 1.0;
    return d;
  };
  FakeOracle o(1, kT, 3, [](const Matrix&) { return std::vector<double>{1.0, 0.0, 0.0}; },
               [](const TimeSeriesSample& x, ClassLabel, const std::string&, int) { return Matrix(1, x.length(), 1.0); });
  o.with_dense(wrong);
  const auto score = localization("m", OraclePool(o), data);
  out.require(score.available() && score.value == 0.0, "misclassified-only metric gave " + fmt(score.value));
  if (out.ok) out.detail = "flat 0.5, front 40/55, back 15/55, full 1, misclassified 0";
  return out;
}

// ---------------------------------------------------------------------------

ScoreTable direction_table(std::uint64_t seed) {
  EvaluationRequest r;
  r.dataset = "synthetic:planted_impulse";
  r.methods = {reference::kMethodGradient, reference::kMethodRandom};
  r.metrics = {MetricId::kSanity, MetricId::kFaithfulnessTi};
  r.seed = seed;
  return evaluate(r).table;
}

std::map<std::uint64_t, ScoreTable>& direction_tables() {
  static std::map<std::uint64_t, ScoreTable> cache;
  if (cache.empty())
    for (std::uint64_t seed = 1; seed <= 5; ++seed) cache.emplace(seed, direction_table(seed));
  return cache;
}

Outcome sanity_direction() {
  Outcome out;
  int wins = 0;
  double worst_random = 0.0;
  std::string values;
  for (const auto& [seed, t] : direction_tables()) {
    const double g = lookup(t, MetricId::kSanity, "gradient", "synthetic:planted_impulse").value;
    const double r = lookup(t, MetricId::kSanity, "random", "synthetic:planted_impulse").value;
    wins += g > r;
    worst_random = std::max(worst_random, std::fabs(r + 1.0));
    values += (values.empty() ? "" : " ") + fmt(g, 3) + "/" + fmt(r, 3);
  }
  out.require(wins == 5, "gradient ahead in " + std::to_string(wins) + "/5 seeds (" + values + ")");
  out.require(worst_random <= 0.05, "random strays " + fmt(worst_random) + " from -1");
  if (out.ok) out.detail = "5/5 seeds, gradient/random " + values;
  return out;
}

Outcome faithfulness_direction() {
  Outcome out;
  int wins = 0;
  std::string values;
  for (const auto& [seed, t] : direction_tables()) {
    const double g = lookup(t, MetricId::kFaithfulnessTi, "gradient", "synthetic:planted_impulse").value;
    const double r = lookup(t, MetricId::kFaithfulnessTi, "random", "synthetic:planted_impulse").value;
    wins += g > r;
    values += (values.empty() ? "" : " ") + fmt(g, 3) + "/" + fmt(r, 3);
  }
  out.require(wins == 5, "gradient ahead in " + std::to_string(wins) + "/5 seeds (" + values + ")");
  // Single informative cell among H*T = 2*16 placements.
  constexpr std::size_t kH = 2, kT = 16, kCells = kH * kT;
  std::vector<std::string> methods;
  for (std::size_t k = 0; k < kCells; ++k) methods.push_back(std::to_string(k));
  std::size_t comparisons = 0;
  for (std::size_t key = 0; key < kCells && out.ok; ++key) {
    std::mt19937_64 rng(key + 1);
    std::vector<Matrix> xs;
    for (int i = 0; i < 6; ++i) {
      Matrix x = random_matrix(kH, kT, rng);
      x.flat()[key] = 2.0;
      xs.push_back(x);
    }
    const auto data = labeled(xs, {0, 1, 0, 1, 0, 1}, 2);
    FakeOracle o(kH, kT, 2, [key](const Matrix& x) { return binary(sigmoid(3.0 * x.flat()[key])); },
                 [](const TimeSeriesSample&, ClassLabel, const std::string& m, int) {
                   Matrix r(kH, kT);
                   r.flat()[std::stoul(m)] = 1.0;
                   return r;
                 });
    o.with_methods(methods);
    const Matrix fill(kH, kT);
    const double best = faithfulness_ti(methods[key], OraclePool(o), data, fill).value;
    for (std::size_t q = 0; q < kCells; ++q) {
      if (q == key) continue;
      const double other = faithfulness_ti(methods[q], OraclePool(o), data, fill).value;
      out.require(best > other, "key " + std::to_string(key) + " loses to placement " + std::to_string(q));
      ++comparisons;
    }
  }
  if (out.ok) out.detail = "5/5 seeds (" + values + "), " + std::to_string(comparisons) + " placements";
  return out;
}

// ---------------------------------------------------------------------------

Outcome ts_ti_bias() {
  Outcome out;
  constexpr std::size_t kT = 32, kA = 5, kB = 25;
  std::vector<Matrix> xs;
  for (int i = 0; i < 4; ++i) {
    Matrix x(1, kT, 0.1 * i);
    x(0, kA) = 1.0;
    x(0, kB) = 1.0;
    xs.push_back(x);
  }
  const auto data = labeled(xs, {0, 1, 0, 1}, 2);
  // Either cell alone keeps the prediction.
  FakeOracle o(1, kT, 2, [](const Matrix& x) { return binary(std::max(x(0, kA), x(0, kB)) > 0.5 ? 0.9 : 0.1); },
               [](const TimeSeriesSample&, ClassLabel, const std::string&, int) {
                 Matrix r(1, kT);
                 r(0, kA) = 1.0;
                 r(0, kB) = 0.9;
                 return r;
               });
  const Matrix fill(1, kT);
  std::vector<std::pair<double, double>> runs;
  for (int rep = 0; rep < 3; ++rep)
    runs.emplace_back(faithfulness_ts("m", OraclePool(o), data, fill).value,
                      faithfulness_ti("m", OraclePool(o), data, fill).value);
  const auto [ts, ti] = runs.front();
  const double ti_gain = ti + 0.9;
  const double expected_ti = -(0.5 * (0.9 + 0.9) + 0.5 * (0.9 + 0.1) + 8 * 0.1) / 10.0;
  out.require(ts == 0.0, "TS gap " + fmt(ts));
  out.require(std::fabs(ti - expected_ti) <= 1e-12, "TI " + fmt(ti, 17) + " vs " + fmt(expected_ti, 17));
  out.require(ts < ti_gain, "TS not below TI gain");
  for (const auto& r : runs) out.require(r == runs.front(), "not deterministic");
  if (out.ok) out.detail = "TS gap 0 < TI gain " + fmt(ti_gain, 6);
  return out;
}

// ---------------------------------------------------------------------------

Outcome sensitivity_analytic() {
  Outcome out;
  std::vector<double> w0(24, 0.0), w1(24, 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t k = 0; k < 12; ++k) w0[k] = u(rng);
  for (std::size_t k = 12; k < 24; ++k) w1[k] = u(rng);
  auto model = std::make_shared<reference::LinearModel>(reference::LinearModel::from_weights(2, 12, {w0, w1}));
  reference::ReferenceOracle lin(model, {});
  const auto data = testing::noise_dataset(8, 2, 12, 2, 4);
  const double orth = inter_class_sensitivity("gradient", OraclePool(lin), data).value;
  out.require(std::fabs(orth) <= 1e-9, "orthogonal " + fmt(orth, 17));
  FakeOracle o(1, 24, 2, [](const Matrix& x) { return binary(sigmoid(x(0, 0))); },
               [](const TimeSeriesSample& s, ClassLabel c, const std::string& m, int) {
                 Matrix r = keyed_noise(s);
                 for (double& v : r.flat()) v -= 0.3;
                 if (m == "inverted" && c.index == 1)
                   for (double& v : r.flat()) v = -v;
                 return r;
               });
  o.with_methods({"same", "inverted"});
  const auto d2 = testing::noise_dataset(6, 1, 24, 2, 5);
  const double same = inter_class_sensitivity("same", OraclePool(o), d2).value;
  const double inv = inter_class_sensitivity("inverted", OraclePool(o), d2).value;
  out.require(same == -1.0, "identical maps " + fmt(same, 17));
  out.require(inv == 1.0, "inverted maps " + fmt(inv, 17));
  if (out.ok) out.detail = "orthogonal " + fmt(orth, 3) + ", identical -1, inverted +1";
  return out;
}

// ---------------------------------------------------------------------------

Outcome robustness_limits() {
  Outcome out;
  FakeOracle fixed(1, 16, 2, [](const Matrix& x) { return binary(sigmoid(x(0, 2))); },
                   [](const TimeSeriesSample& s, ClassLabel, const std::string&, int) { return keyed_noise(s); });
  const auto noise = testing::noise_dataset(5, 1, 16, 2, 7);
  const double independent = robustness("m", OraclePool(fixed), noise).value;
  out.require(independent == 0.0, "input-independent " + fmt(independent, 17));

  const auto data = load_evaluation_data("synthetic:planted_impulse,n=20", 3);
  const auto trained = train_reference(data.train, {}, 3);
  const OraclePool pool(reference::reference_factory(trained.model, trained.saliency), 1);
  std::string detail;
  for (std::uint64_t seed : {0u, 1u}) {
    RobustnessConfig tiny;
    tiny.radius = 1e-12;
    tiny.seed = seed;
    const double v = robustness("gradient", pool, data.eval, tiny).value;
    out.require(std::fabs(v) < 1e-6, "a=1e-12 gave " + fmt(v));
    double prev = 0.0;
    for (double a : {0.01, 0.05, 0.1, 0.2}) {
      RobustnessConfig cfg;
      cfg.radius = a;
      cfg.seed = seed;
      const double s = robustness("gradient", pool, data.eval, cfg).value;
      out.require(s <= prev, "seed " + std::to_string(seed) + ": score rises to " + fmt(s) + " at a=" + fmt(a));
      prev = s;
      if (seed == 0) detail += (detail.empty() ? "" : " ") + fmt(s, 3);
    }
  }
  if (out.ok) out.detail = "independent 0, tiny radius < 1e-6, radii 0.01..0.2: " + detail;
  return out;
}

// ---------------------------------------------------------------------------

struct SuiteRun {
  ScoreTable table;
  double seconds = 0.0;
};

const SuiteRun& full_suite_run() {
  static std::optional<SuiteRun> run;
  if (!run) {
    run.emplace();
    const auto t0 = Clock::now();
    for (const char* d : {"synthetic:planted_impulse", "synthetic:planted_block", "synthetic:segmentation_runs"}) {
      EvaluationRequest r;
      r.dataset = d;
      r.seed = 0;
      const auto result = evaluate(r);
      for (const auto& e : result.table.entries()) run->table.add(e);
    }
    run->seconds = seconds_since(t0);
  }
  return *run;
}

double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Outcome normalization_correlation() {
  Outcome out;
  const auto& suite = full_suite_run();
  const auto normalized = normalize_dataset_bias(suite.table);
  std::map<std::tuple<MetricId, std::string, std::string>, std::vector<double>> groups;
  for (const auto& e : normalized.entries())
    if (e.available()) groups[{e.metric, e.dataset, e.model_state}].push_back(e.value);
  for (const auto& [key, v] : groups) {
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    for (double x : v) var += (x - mean) * (x - mean) / static_cast<double>(v.size());
    const std::string name = std::string(to_string(std::get<0>(key))) + "/" + std::get<1>(key);
    out.require(std::fabs(mean) <= 1e-9, name + " mean " + fmt(mean));
    out.require(std::fabs(var - 1.0) <= 1e-9, name + " variance " + fmt(var, 17));
  }
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> len(3, 60);
    std::normal_distribution<double> g(0.0, 1.0);
    const int n = len(rng);
    std::vector<double> x(n), y(n);
    const double shift = trial % 2 ? 1e3 : 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] = shift + g(rng);
      y[i] = 0.5 * x[i] + g(rng);
    }
    worst = std::max(worst, std::fabs(pearson(x, y) - naive_pearson(x, y)));
  }
  out.require(worst <= 1e-12, "pearson differs by " + fmt(worst));
  const auto cm = correlation_matrix(suite.table);
  std::size_t pairs = 0, masked = 0;
  double max_abs = 0.0;
  for (std::size_t a = 0; a < cm.metrics.size(); ++a)
    for (std::size_t b = 0; b < cm.metrics.size(); ++b) {
      if (a == b) continue;
      if (cm.masked(a, b)) {
        ++masked;
        continue;
      }
      ++pairs;
      max_abs = std::max(max_abs, std::fabs(cm.r(a, b)));
      out.require(std::fabs(cm.r(a, b)) != 1.0, std::string(to_string(cm.metrics[a])) + " vs " +
                                                    std::string(to_string(cm.metrics[b])) + " has |r| = 1");
    }
  out.require(cm.metrics.size() == std::size(kAllMetrics), "matrix covers " + std::to_string(cm.metrics.size()) + " metrics");
  if (out.ok)
    out.detail = std::to_string(groups.size()) + " groups, " + std::to_string(cm.metrics.size()) + "x" +
                 std::to_string(cm.metrics.size()) + " matrix, max off-diagonal |r| " + fmt(max_abs, 3) + ", " +
                 std::to_string(masked) + " masked";
  return out;
}

// ---------------------------------------------------------------------------

std::pair<int, std::string> run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + TSXAI_CLI_PATH + "' " + args + " 2>/dev/null";
  std::string text;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) text.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
}

Outcome determinism() {
  Outcome out;
  const std::string base =
      "evaluate --dataset synthetic:segmentation_runs,n=24,length=48 --seed 9 --epochs 40 --format json";
  const auto a = run_cli(base + " --workers 1");
  const auto b = run_cli(base + " --workers 1");
  const auto c = run_cli(base + " --workers 3");
  const auto d = run_cli(base + " --workers 8");
  out.require(a.first == 0 || a.first == 2, "exit code " + std::to_string(a.first));
  out.require(!a.second.empty(), "empty output");
  out.require(a == b, "repeat run differs");
  out.require(a == c, "3 workers differ from 1");
  out.require(a == d, "8 workers differ from 1");
  if (out.ok) out.detail = "byte-identical at 1, 1, 3, 8 workers (" + std::to_string(a.second.size()) + " bytes)";
  return out;
}

Outcome full_suite() {
  Outcome out;
  const auto& suite = full_suite_run();
  const std::size_t expected = std::size(kAllMetrics) * 4 * 3;
  out.require(suite.table.size() == expected, std::to_string(suite.table.size()) + " rows");
  std::size_t available = suite.table.size() - suite.table.unavailable_count();
  // Localization needs segmentation: 8 classification rows are unavailable.
  out.require(suite.table.unavailable_count() == 8, std::to_string(suite.table.unavailable_count()) + " unavailable");
  out.require(suite.seconds < 300.0, "took " + fmt(suite.seconds) + " s");
  if (out.ok)
    out.detail = std::to_string(suite.table.size()) + " rows (" + std::to_string(available) + " scored) in " +
                 fmt(suite.seconds, 3) + " s";
  return out;
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"gradient_oracle", gradient_oracle},
      {"dtw_exactness", dtw_exactness},
      {"ssim_identities", ssim_identities},
      {"localization_fixtures", localization_fixtures},
      {"sanity_direction", sanity_direction},
      {"faithfulness_direction", faithfulness_direction},
      {"ts_ti_bias_fixture", ts_ti_bias},
      {"sensitivity_analytic", sensitivity_analytic},
      {"robustness_limits", robustness_limits},
      {"normalization_correlation", normalization_correlation},
      {"determinism_end_to_end", determinism},
      {"full_synthetic_suite", full_suite},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.ok;
    std::printf("%s  %-26s %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures ? 1 : 0;
}
