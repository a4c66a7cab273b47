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

// The model-query surface every metric drives: prediction, saliency and
// cascading-randomization sessions.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsxai/core.hpp"

namespace tsxai {

inline constexpr int kProtocolVersion = 1;

/// Backend fault, protocol violation, or a rejected request.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleInfo {
  int num_classes = 0;
  std::size_t channels = 0;
  std::size_t length = 0;
  int layer_count = 0;
  std::vector<std::string> methods;
  TaskKind task_kind = TaskKind::kClassification;

  friend bool operator==(const OracleInfo&, const OracleInfo&) = default;
};

struct Prediction {
  std::vector<double> softmax;
  // Segmentation backends also report per-step probabilities, C x T.
  std::optional<Matrix> dense_softmax;
  std::string model_state_id;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Output-to-input randomization state; layers_randomized counts finished
/// stages.
struct CascadeSession {
  std::string session_id;
  int layers_randomized = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const CascadeSession&, const CascadeSession&) = default;
};

class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual OracleInfo describe() = 0;
  virtual Prediction predict(const TimeSeriesSample& sample) = 0;
  virtual SaliencyMap saliency(const TimeSeriesSample& sample, ClassLabel target,
                               const std::string& method_id, std::uint64_t seed) = 0;
  virtual CascadeSession begin_cascade(std::uint64_t seed) = 0;
  virtual CascadeSession advance_cascade(const CascadeSession& session) = 0;
  /// Restores trained parameters and ends any session; returns the state id.
  virtual std::string reset() = 0;
  /// "trained" or an id naming the current randomization stage.
  virtual std::string state_id() = 0;
};

/// Produces independent connections; each worker owns one.
using OracleFactory = std::function<std::unique_ptr<Oracle>()>;

inline int argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<int>(best);
}

inline int argmin(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return static_cast<int>(best);
}

inline constexpr double kSoftmaxSumTolerance = 1e-6;

/// Boundary check for any prediction entering the engine.
inline void validate_prediction(const Prediction& p, const OracleInfo& info) {
  if (p.softmax.size() != static_cast<std::size_t>(info.num_classes))
    throw OracleError("softmax has " + std::to_string(p.softmax.size()) + " entries, expected " +
                      std::to_string(info.num_classes));
  double sum = 0.0;
  for (double v : p.softmax) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw OracleError("softmax entry outside [0,1]");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > kSoftmaxSumTolerance)
    throw OracleError("softmax sums to " + std::to_string(sum) + ", not 1");
  if (p.dense_softmax) {
    const Matrix& d = *p.dense_softmax;
    if (d.rows() != static_cast<std::size_t>(info.num_classes) || d.cols() != info.length)
      throw OracleError("dense softmax has the wrong shape");
    for (std::size_t t = 0; t < d.cols(); ++t) {
      double s = 0.0;
      for (std::size_t c = 0; c < d.rows(); ++c) {
        const double v = d(c, t);
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
          throw OracleError("dense softmax entry outside [0,1]");
        s += v;
      }
      if (std::fabs(s - 1.0) > kSoftmaxSumTolerance)
        throw OracleError("dense softmax column does not sum to 1");
    }
  }
}

inline void validate_saliency(const SaliencyMap& m, const TimeSeriesSample& sample) {
  if (m.relevance.rows() != sample.channels() || m.relevance.cols() != sample.length())
    throw OracleError("saliency shape differs from the sample shape");
  if (!m.relevance.all_finite()) throw OracleError("saliency contains non-finite values");
}

}  // namespace tsxai
