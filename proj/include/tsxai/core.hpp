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

// Shared value types: samples, labels, datasets, saliency maps and scores.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsxai {

/// Raised when an input violates a documented invariant (shape, range,
/// finiteness, label domain).
class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for invalid metric / backend configuration values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major real matrix with `rows` channels and `cols` time steps.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw InvariantError("matrix data size " + std::to_string(data_.size()) +
                           " does not match shape " + std::to_string(rows_) +
                           "x" + std::to_string(cols_));
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.flat()) s += v * v;
  return std::sqrt(s);
}

inline void require_same_shape(const Matrix& a, const Matrix& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw InvariantError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
}

/// One multivariate series, H channels by T steps.
class TimeSeriesSample {
 public:
  TimeSeriesSample() = default;
  TimeSeriesSample(Matrix values, std::string sample_id)
      : values_(std::move(values)), id_(std::move(sample_id)) {
    if (values_.rows() < 1) throw InvariantError("sample needs H >= 1");
    if (values_.cols() < 2) throw InvariantError("sample needs T >= 2");
    if (!values_.all_finite()) throw InvariantError("sample '" + id_ + "' has non-finite values");
  }

  const Matrix& values() const { return values_; }
  const std::string& id() const { return id_; }
  std::size_t channels() const { return values_.rows(); }
  std::size_t length() const { return values_.cols(); }

  /// Same identity, new values (used for perturbed copies).
  TimeSeriesSample with_values(Matrix values) const {
    return TimeSeriesSample(std::move(values), id_);
  }

  friend bool operator==(const TimeSeriesSample&, const TimeSeriesSample&) = default;

 private:
  Matrix values_;
  std::string id_;
};

/// Class index in [0, C).
struct ClassLabel {
  int index = 0;
  friend bool operator==(ClassLabel, ClassLabel) = default;
  friend auto operator<=>(ClassLabel, ClassLabel) = default;
};

/// Per-step labels; std::nullopt is the `none` sentinel.
using DenseLabels = std::vector<std::optional<int>>;

enum class TaskKind { kClassification, kSegmentation };

inline std::string_view to_string(TaskKind k) {
  return k == TaskKind::kClassification ? "classification" : "segmentation";
}

inline TaskKind parse_task_kind(std::string_view s) {
  if (s == "classification") return TaskKind::kClassification;
  if (s == "segmentation") return TaskKind::kSegmentation;
  throw ConfigError("unknown task kind '" + std::string(s) + "'");
}

/// Half-open labeled range [start, end).
struct LabeledSegment {
  ClassLabel label;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const LabeledSegment&, const LabeledSegment&) = default;
};

/// Maximal runs of identical non-`none` labels, in order.
inline std::vector<LabeledSegment> segments_from_dense(const DenseLabels& labels) {
  std::vector<LabeledSegment> out;
  std::size_t t = 0;
  while (t < labels.size()) {
    if (!labels[t]) {
      ++t;
      continue;
    }
    const int cls = *labels[t];
    std::size_t end = t + 1;
    while (end < labels.size() && labels[end] == cls) ++end;
    out.push_back({ClassLabel{cls}, t, end});
    t = end;
  }
  return out;
}

/// Inverse of segments_from_dense on a series of length `length`.
inline DenseLabels dense_from_segments(std::span<const LabeledSegment> segments,
                                       std::size_t length) {
  DenseLabels out(length);
  for (const auto& s : segments) {
    if (s.start >= s.end || s.end > length) throw InvariantError("segment outside series");
    for (std::size_t t = s.start; t < s.end; ++t) out[t] = s.label.index;
  }
  return out;
}

/// An ordered, validated collection of equally shaped samples.
class Dataset {
 public:
  Dataset() = default;

  static Dataset classification(std::string name, std::vector<TimeSeriesSample> samples,
                                std::vector<ClassLabel> labels, int num_classes) {
    Dataset d;
    d.name_ = std::move(name);
    d.kind_ = TaskKind::kClassification;
    d.samples_ = std::move(samples);
    d.labels_ = std::move(labels);
    d.num_classes_ = num_classes;
    d.validate();
    return d;
  }

  static Dataset segmentation(std::string name, std::vector<TimeSeriesSample> samples,
                              std::vector<DenseLabels> dense, int num_classes) {
    Dataset d;
    d.name_ = std::move(name);
    d.kind_ = TaskKind::kSegmentation;
    d.samples_ = std::move(samples);
    d.dense_ = std::move(dense);
    d.num_classes_ = num_classes;
    d.validate();
    return d;
  }

  const std::string& name() const { return name_; }
  TaskKind task_kind() const { return kind_; }
  std::size_t size() const { return samples_.size(); }
  int num_classes() const { return num_classes_; }
  std::size_t channels() const { return samples_.front().channels(); }
  std::size_t length() const { return samples_.front().length(); }

  const TimeSeriesSample& sample(std::size_t i) const { return samples_.at(i); }
  const std::vector<TimeSeriesSample>& samples() const { return samples_; }
  const std::vector<ClassLabel>& labels() const { return labels_; }
  const std::vector<DenseLabels>& dense_labels() const { return dense_; }

  /// Sample-level class: the label for classification, the most frequent
  /// labeled class (lowest index on ties) for segmentation.
  ClassLabel sample_class(std::size_t i) const {
    if (kind_ == TaskKind::kClassification) return labels_.at(i);
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
    for (const auto& l : dense_.at(i))
      if (l) ++counts[static_cast<std::size_t>(*l)];
    const auto it = std::max_element(counts.begin(), counts.end());
    return ClassLabel{static_cast<int>(it - counts.begin())};
  }

  /// Per-(channel, time) mean over all samples.
  Matrix mean_series() const {
    Matrix m(channels(), length());
    for (const auto& s : samples_)
      for (std::size_t k = 0; k < m.size(); ++k) m.flat()[k] += s.values().flat()[k];
    for (double& v : m.flat()) v /= static_cast<double>(samples_.size());
    return m;
  }

  /// max - min over every value in the dataset.
  double value_range() const {
    double lo = samples_.front().values().flat()[0];
    double hi = lo;
    for (const auto& s : samples_)
      for (double v : s.values().flat()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    return hi - lo;
  }

  Dataset subset(std::span<const std::size_t> rows, std::string name) const {
    std::vector<TimeSeriesSample> s;
    std::vector<ClassLabel> l;
    std::vector<DenseLabels> d;
    for (std::size_t r : rows) {
      s.push_back(samples_.at(r));
      if (kind_ == TaskKind::kClassification) l.push_back(labels_.at(r));
      else d.push_back(dense_.at(r));
    }
    return kind_ == TaskKind::kClassification
               ? classification(std::move(name), std::move(s), std::move(l), num_classes_)
               : segmentation(std::move(name), std::move(s), std::move(d), num_classes_);
  }

  Dataset with_samples(std::vector<TimeSeriesSample> samples) const {
    Dataset d = *this;
    d.samples_ = std::move(samples);
    d.validate();
    return d;
  }

 private:
  void validate() const {
    if (samples_.size() < 2) throw InvariantError("dataset '" + name_ + "' needs N >= 2");
    if (num_classes_ < 2) throw InvariantError("dataset '" + name_ + "' needs C >= 2");
    const std::size_t h = samples_.front().channels();
    const std::size_t t = samples_.front().length();
    for (const auto& s : samples_)
      if (s.channels() != h || s.length() != t)
        throw InvariantError("dataset '" + name_ + "': sample '" + s.id() + "' has a different shape");
    if (kind_ == TaskKind::kClassification) {
      if (labels_.size() != samples_.size())
        throw InvariantError("dataset '" + name_ + "': label count differs from sample count");
      std::vector<bool> seen(static_cast<std::size_t>(num_classes_), false);
      for (auto l : labels_) {
        if (l.index < 0 || l.index >= num_classes_)
          throw InvariantError("dataset '" + name_ + "': label out of range");
        seen[static_cast<std::size_t>(l.index)] = true;
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw InvariantError("dataset '" + name_ + "': every class must appear at least once");
    } else {
      if (dense_.size() != samples_.size())
        throw InvariantError("dataset '" + name_ + "': label count differs from sample count");
      for (const auto& d : dense_) {
        if (d.size() != t) throw InvariantError("dataset '" + name_ + "': dense label length != T");
        for (const auto& l : d)
          if (l && (*l < 0 || *l >= num_classes_))
            throw InvariantError("dataset '" + name_ + "': dense label out of range");
      }
    }
  }

  std::string name_;
  TaskKind kind_ = TaskKind::kClassification;
  std::vector<TimeSeriesSample> samples_;
  std::vector<ClassLabel> labels_;
  std::vector<DenseLabels> dense_;
  int num_classes_ = 0;
};

/// Relevance for one (sample, class, method, model state).
struct SaliencyMap {
  Matrix relevance;
  ClassLabel target_class;
  std::string method_id;
  std::string model_state_id;

  friend bool operator==(const SaliencyMap&, const SaliencyMap&) = default;
};

inline void require_shape(const SaliencyMap& m, const TimeSeriesSample& s) {
  if (m.relevance.rows() != s.channels() || m.relevance.cols() != s.length())
    throw InvariantError("saliency map for '" + s.id() + "' does not match the sample shape");
  if (!m.relevance.all_finite()) throw InvariantError("saliency map has non-finite values");
}

enum class MetricId {
  kSanity,
  kFaithfulnessTi,
  kFaithfulnessTs,
  kSensitivity,
  kRobustness,
  kStability,
  kLocalization,
};

inline constexpr MetricId kAllMetrics[] = {
    MetricId::kSanity,      MetricId::kFaithfulnessTi, MetricId::kFaithfulnessTs,
    MetricId::kSensitivity, MetricId::kRobustness,     MetricId::kStability,
    MetricId::kLocalization};

inline std::string_view to_string(MetricId m) {
  switch (m) {
    case MetricId::kSanity: return "sanity";
    case MetricId::kFaithfulnessTi: return "faithfulness_ti";
    case MetricId::kFaithfulnessTs: return "faithfulness_ts";
    case MetricId::kSensitivity: return "sensitivity";
    case MetricId::kRobustness: return "robustness";
    case MetricId::kStability: return "stability";
    case MetricId::kLocalization: return "localization";
  }
  return "?";
}

inline MetricId parse_metric_id(std::string_view s) {
  for (MetricId m : kAllMetrics)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

enum class ScoreStatus { kOk, kUnavailable };

/// One (metric, method, dataset, model state) score. Higher is better for
/// every metric.
struct MetricScore {
  MetricId metric = MetricId::kSanity;
  std::string method_id;
  std::string dataset;
  std::string model_state = "trained";
  ScoreStatus status = ScoreStatus::kOk;
  double value = 0.0;
  std::vector<double> per_sample;  // empty when the metric has no per-item breakdown
  std::string config_digest;
  std::vector<std::string> warnings;
  std::map<std::string, double> diagnostics;

  bool available() const { return status == ScoreStatus::kOk; }

  static MetricScore unavailable(MetricId m, std::string method, std::string dataset,
                                 std::string reason) {
    MetricScore s;
    s.metric = m;
    s.method_id = std::move(method);
    s.dataset = std::move(dataset);
    s.status = ScoreStatus::kUnavailable;
    s.value = 0.0;
    s.warnings.push_back(std::move(reason));
    return s;
  }
};

/// 64-bit FNV-1a, used for digests and sample-keyed seeds.
inline std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex_digest(std::string_view text) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a(text);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

/// SplitMix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tsxai
