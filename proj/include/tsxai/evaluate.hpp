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

// End-to-end runs: dataset resolution, backend construction and the
// metric x method sweep that fills a ScoreTable.

#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsxai/core.hpp"
#include "tsxai/datasets.hpp"
#include "tsxai/metrics.hpp"
#include "tsxai/oracle.hpp"
#include "tsxai/reference/model.hpp"
#include "tsxai/reference/oracle.hpp"
#include "tsxai/report.hpp"
#include "tsxai/transport.hpp"

namespace tsxai {

inline constexpr const char* kBackendEnv = "TSXAI_BACKEND";

/// Train split (fits the reference model and the replacement statistics)
/// and the split the metrics are computed on.
struct EvaluationData {
  Dataset train;
  Dataset eval;
};

namespace evaluate_detail {

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = std::min(s.find(sep, start), s.size());
    const auto item = datasets_detail::trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

template <class T>
T to_number(const std::string& key, const std::string& v) {
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError("bad value '" + v + "' for '" + key + "'");
  return out;
}

}  // namespace evaluate_detail

/// Parses "synthetic:KIND[,key=value...]" with keys n, channels, length,
/// classes, noise, amplitude, block_len, min_run, seed.
inline SyntheticSpec parse_synthetic_spec(std::string_view text, std::uint64_t default_seed = 0) {
  using evaluate_detail::to_number;
  constexpr std::string_view kPrefix = "synthetic:";
  if (text.substr(0, kPrefix.size()) != kPrefix) throw ConfigError("not a synthetic dataset spec");
  const auto parts = evaluate_detail::split_list(text.substr(kPrefix.size()));
  if (parts.empty()) throw ConfigError("synthetic spec needs a kind");
  SyntheticSpec s;
  s.kind = parse_synthetic_kind(parts[0]);
  s.seed = default_seed;
  if (s.kind == SyntheticKind::kSegmentationRuns) s.num_classes = 3;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw ConfigError("synthetic option '" + parts[i] + "' must be key=value");
    const std::string k = parts[i].substr(0, eq), v = parts[i].substr(eq + 1);
    if (k == "n") s.n = to_number<std::size_t>(k, v);
    else if (k == "channels") s.channels = to_number<std::size_t>(k, v);
    else if (k == "length") s.length = to_number<std::size_t>(k, v);
    else if (k == "classes") s.num_classes = to_number<int>(k, v);
    else if (k == "noise") s.noise_std = to_number<double>(k, v);
    else if (k == "amplitude") s.amplitude = to_number<double>(k, v);
    else if (k == "block_len") s.block_len = to_number<std::size_t>(k, v);
    else if (k == "min_run") s.min_run = to_number<std::size_t>(k, v);
    else if (k == "seed") s.seed = to_number<std::uint64_t>(k, v);
    else throw ConfigError("unknown synthetic option '" + k + "'");
  }
  return s;
}

/// Synthetic: independent train and eval draws from the same generator.
/// UCR file: the whole file serves as both. Manifest: its train/test splits.
inline EvaluationData load_evaluation_data(const std::string& source, std::uint64_t seed) {
  if (source.rfind("synthetic:", 0) == 0) {
    auto spec = parse_synthetic_spec(source, seed);
    auto eval = generate(spec).data;
    spec.seed = mix_seed(spec.seed, 0x747261696eULL);
    auto train = generate(spec).data;
    return {std::move(train), std::move(eval)};
  }
  const std::filesystem::path p(source);
  const auto ext = p.extension().string();
  if (ext == ".tsv" || ext == ".csv") {
    auto d = znormalize(load_ucr_tsv(p));
    return {d, d};
  }
  auto loaded = load_manifest(p);
  if (loaded.test) return {std::move(loaded.train), std::move(*loaded.test)};
  return {loaded.train, loaded.train};
}

struct ReferenceBackendConfig {
  reference::TrainConfig train;
  reference::SaliencyConfig saliency;

  std::string canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << "epochs=" << train.epochs << ";lr=" << train.learning_rate << ";l1=" << train.l1_coeff
      << ";l2=" << train.l2_coeff << ";smoothgrad_samples=" << saliency.smoothgrad_samples
      << ";smoothgrad_sigma=" << saliency.smoothgrad_sigma << ";ig_steps=" << saliency.ig_steps
      << ";occlusion_window=" << saliency.occlusion_window << ";occlusion_stride=" << saliency.occlusion_stride;
    return s.str();
  }
};

struct TrainedReference {
  std::shared_ptr<const reference::Model> model;
  reference::SaliencyConfig saliency;
  reference::TrainResult result;
};

/// Trains the reference network on `train`; deterministic in `seed`.
inline TrainedReference train_reference(const Dataset& train, const ReferenceBackendConfig& cfg, std::uint64_t seed) {
  reference::ConvNetConfig net;
  net.channels = train.channels();
  net.length = train.length();
  net.num_classes = train.num_classes();
  net.task = train.task_kind();
  net.seed = mix_seed(seed, 1);
  auto model = std::make_shared<reference::ConvNet>(net);
  auto tc = cfg.train;
  tc.seed = mix_seed(seed, 2);
  TrainedReference out;
  out.result = reference::train(*model, train, tc);
  out.saliency = cfg.saliency;
  out.saliency.data_range = train.value_range();
  out.saliency.fill = train.mean_series();
  out.model = std::move(model);
  return out;
}

/// "reference", "exec:CMD" or "tcp:HOST:PORT". An empty string falls back
/// to the backend environment variable, then to "reference".
inline std::string resolve_backend(std::string backend) {
  if (backend.empty()) {
    const char* env = std::getenv(kBackendEnv);
    backend = env && *env ? env : "reference";
  }
  return backend;
}

inline OracleFactory remote_factory(const std::string& backend) {
  if (backend.rfind("exec:", 0) == 0) {
    const std::string cmd = backend.substr(5);
    if (cmd.empty()) throw ConfigError("exec backend needs a command");
    return [cmd]() -> std::unique_ptr<Oracle> {
      return std::make_unique<RemoteOracle>(std::make_unique<ProcessChannel>(cmd));
    };
  }
  if (backend.rfind("tcp:", 0) == 0) {
    const std::string addr = backend.substr(4);
    split_host_port(addr);
    return [addr]() -> std::unique_ptr<Oracle> { return std::make_unique<RemoteOracle>(connect_tcp(addr)); };
  }
  throw ConfigError("unknown backend '" + backend + "'");
}

struct EvaluationRequest {
  std::string dataset;
  std::string backend = "reference";
  std::vector<std::string> methods = {"gradient", "integrated_gradients", "occlusion", "random"};
  std::vector<MetricId> metrics = {std::begin(kAllMetrics), std::end(kAllMetrics)};
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  MetricSuiteConfig suite;
  ReferenceBackendConfig reference;
};

/// Resolved configuration recorded in the table; excludes the worker count,
/// which never changes results.
inline std::string canonical_request(const EvaluationRequest& r) {
  std::ostringstream s;
  s << "dataset=" << r.dataset << "\nbackend=" << r.backend << "\nseed=" << r.seed << "\nmethods=";
  for (std::size_t i = 0; i < r.methods.size(); ++i) s << (i ? "," : "") << r.methods[i];
  s << "\nmetrics=";
  for (std::size_t i = 0; i < r.metrics.size(); ++i) s << (i ? "," : "") << to_string(r.metrics[i]);
  s << "\nsaliency_seed=" << r.suite.saliency_seed << "\nsanity=" << r.suite.sanity.canonical()
    << "\nfaithfulness=" << r.suite.faithfulness.canonical() << "\nrobustness=" << r.suite.robustness.canonical()
    << "\nstability=" << r.suite.stability.canonical() << "\nlocalization=" << r.suite.localization.canonical();
  if (r.backend == "reference") s << "\nreference=" << r.reference.canonical();
  return s.str();
}

struct EvaluationResult {
  ScoreTable table;
  std::vector<std::string> notes;
};

/// Scores the given methods on already-loaded data against `factory`.
inline ScoreTable evaluate_with(const OracleFactory& factory, const EvaluationData& data,
                                const std::vector<std::string>& methods, const std::vector<MetricId>& metrics,
                                const MetricSuiteConfig& suite, std::size_t workers) {
  OraclePool pool(factory, std::max<std::size_t>(1, std::min(workers, data.eval.size())));
  const OracleInfo info = pool.primary().describe();
  if (info.channels != data.eval.channels() || info.length != data.eval.length())
    throw ConfigError("backend input shape " + std::to_string(info.channels) + "x" + std::to_string(info.length) +
                      " does not match the dataset " + std::to_string(data.eval.channels()) + "x" +
                      std::to_string(data.eval.length()));
  const Matrix fill = data.train.mean_series();
  ScoreTable table;
  for (MetricId m : metrics)
    for (const auto& method : methods) {
      MetricScore s;
      if (std::find(info.methods.begin(), info.methods.end(), method) == info.methods.end())
        s = MetricScore::unavailable(m, method, data.eval.name(), "backend does not offer method '" + method + "'");
      else
        s = evaluate_metric(m, method, pool, data.eval, fill, suite);
      if (s.config_digest.empty())
        s.config_digest = hex_digest(std::string(to_string(m)) + "|" + method + "|" + data.eval.name());
      table.add(std::move(s));
    }
  return table;
}

inline EvaluationResult evaluate(const EvaluationRequest& req) {
  EvaluationRequest r = req;
  r.backend = resolve_backend(r.backend);
  if (r.methods.empty()) throw ConfigError("no methods selected");
  if (r.metrics.empty()) throw ConfigError("no metrics selected");
  const auto data = load_evaluation_data(r.dataset, r.seed);
  EvaluationResult out;
  OracleFactory factory;
  if (r.backend == "reference") {
    const auto trained = train_reference(data.train, r.reference, r.seed);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", trained.result.accuracy);
    out.notes.push_back("reference model train accuracy " + std::string(buf));
    factory = reference::reference_factory(trained.model, trained.saliency);
  } else {
    factory = remote_factory(r.backend);
  }
  out.table = evaluate_with(factory, data, r.methods, r.metrics, r.suite, r.workers);
  const std::string config = canonical_request(r);
  out.table.provenance()["config"] = config;
  out.table.provenance()["config_digest"] = hex_digest(config);
  out.table.provenance()["seed"] = std::to_string(r.seed);
  return out;
}

}  // namespace tsxai
