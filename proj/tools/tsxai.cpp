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

// Command-line front end: evaluate, report, correlate, serve-check, serve.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tsxai/conformance.hpp"
#include "tsxai/evaluate.hpp"
#include "tsxai/report.hpp"
#include "tsxai/transport.hpp"

namespace {

constexpr int kExitClean = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPartial = 2;

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tsxai::ConfigError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tsxai::ConfigError("cannot write '" + path + "'");
  out << text;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Splices `key = value` lines from the file named by --config into argv as
// --key=value ahead of the user's own arguments, skipping keys the user
// passed explicitly. Flags therefore override the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  std::size_t at = 0;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      at = i;
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      at = i;
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::istringstream in(read_text(path));
  std::vector<std::string> injected;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = tsxai::datasets_detail::trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw tsxai::ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key(tsxai::datasets_detail::trim(t.substr(0, eq)));
    const std::string value(tsxai::datasets_detail::trim(t.substr(eq + 1)));
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (!given) injected.push_back(flag + "=" + value);
  }
  // Insert after the subcommand name (the first element past the program).
  const std::size_t insert_at = std::min<std::size_t>(std::max<std::size_t>(at, 2), args.size());
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), injected.begin(), injected.end());
  return args;
}

struct EvaluateOptions {
  tsxai::EvaluationRequest req;
  std::string methods = "gradient,integrated_gradients,occlusion,random";
  std::string metrics = "all";
  std::string out;
  std::string format;
  std::string normalization = "minmax";
  std::string ranking = "abs";
  std::string robustness_mode = "sparse";
  std::string gamma = "one";
  std::string bias = "flat";
  std::string dynamic_range = "per_pair";
  int dtw_band = -1;
};

void add_evaluate(CLI::App& app, EvaluateOptions& o) {
  auto& r = o.req;
  auto& s = r.suite;
  app.add_option("--dataset", r.dataset, "Dataset path (UCR .tsv or manifest) or synthetic:KIND[,k=v...]")->required();
  app.add_option("--backend", r.backend, "reference | exec:CMD | tcp:HOST:PORT (default: $TSXAI_BACKEND or reference)")
      ->default_str("");
  r.backend.clear();
  app.add_option("--methods", o.methods, "Comma-separated saliency methods")->capture_default_str();
  app.add_option("--metrics", o.metrics, "Comma-separated metrics or 'all'")->capture_default_str();
  app.add_option("--seed", r.seed, "Run seed")->capture_default_str();
  app.add_option("--workers", r.workers, "Oracle connections evaluated in parallel")->capture_default_str();
  app.add_option("--out", o.out, "Output table path (default stdout)");
  app.add_option("--format", o.format, "Table format: json | csv (default from --out extension, else json)");
  app.add_option("--saliency-seed", s.saliency_seed, "Seed passed with saliency requests")->capture_default_str();

  app.add_option("--ssim-window", s.sanity.ssim.window_len, "SSIM window length (odd)")->capture_default_str();
  app.add_option("--ssim-k1", s.sanity.ssim.k1)->capture_default_str();
  app.add_option("--ssim-k2", s.sanity.ssim.k2)->capture_default_str();
  app.add_option("--ssim-range", o.dynamic_range, "per_pair | global")->capture_default_str();
  app.add_option("--ssim-global-range", s.sanity.ssim.global_range)->capture_default_str();
  app.add_option("--sanity-normalization", o.normalization, "raw | abs | minmax")->capture_default_str();
  app.add_option("--cascade-seed", s.sanity.cascade_seed)->capture_default_str();

  app.add_option("--ti-fraction", s.faithfulness.fraction, "Fraction of cells perturbed by TI")->capture_default_str();
  app.add_option("--ti-steps", s.faithfulness.steps)->capture_default_str();
  app.add_option("--ts-length", s.faithfulness.perturb_len, "TS window length (0: T/10)")->capture_default_str();
  app.add_option("--ranking", o.ranking, "raw | abs relevance ranking")->capture_default_str();
  app.add_flag("--ts-all-channels", s.faithfulness.ts_all_channels, "TS perturbs every channel");

  app.add_option("--robustness-radius", s.robustness.radius)->capture_default_str();
  app.add_option("--robustness-samples", s.robustness.mc_samples)->capture_default_str();
  app.add_option("--robustness-mode", o.robustness_mode, "sparse | dense")->capture_default_str();
  app.add_flag("--robustness-relative", s.robustness.relative, "Divide by the unperturbed map norm");

  app.add_option("--dtw-band", o.dtw_band, "Sakoe-Chiba radius (-1: unconstrained)")->capture_default_str();

  app.add_option("--theta", s.localization.theta)->capture_default_str();
  app.add_option("--alpha", s.localization.alpha)->capture_default_str();
  app.add_option("--gamma", o.gamma, "one | reciprocal")->capture_default_str();
  app.add_option("--bias", o.bias, "flat | front | middle | back")->capture_default_str();

  app.add_option("--epochs", r.reference.train.epochs)->capture_default_str();
  app.add_option("--learning-rate", r.reference.train.learning_rate)->capture_default_str();
  app.add_option("--l1", r.reference.train.l1_coeff)->capture_default_str();
  app.add_option("--l2", r.reference.train.l2_coeff)->capture_default_str();
  app.add_option("--smoothgrad-samples", r.reference.saliency.smoothgrad_samples)->capture_default_str();
  app.add_option("--smoothgrad-sigma", r.reference.saliency.smoothgrad_sigma)->capture_default_str();
  app.add_option("--ig-steps", r.reference.saliency.ig_steps)->capture_default_str();
  app.add_option("--occlusion-window", r.reference.saliency.occlusion_window)->capture_default_str();
  app.add_option("--occlusion-stride", r.reference.saliency.occlusion_stride)->capture_default_str();
}

void resolve_evaluate(EvaluateOptions& o) {
  using namespace tsxai;
  auto& s = o.req.suite;
  o.req.methods = evaluate_detail::split_list(o.methods);
  o.req.metrics.clear();
  if (o.metrics == "all") {
    o.req.metrics.assign(std::begin(kAllMetrics), std::end(kAllMetrics));
  } else {
    for (const auto& m : evaluate_detail::split_list(o.metrics)) o.req.metrics.push_back(parse_metric_id(m));
  }
  if (o.normalization == "raw") s.sanity.normalization = MapNormalization::kRaw;
  else if (o.normalization == "abs") s.sanity.normalization = MapNormalization::kAbs;
  else if (o.normalization == "minmax") s.sanity.normalization = MapNormalization::kMinMax;
  else throw ConfigError("unknown sanity normalization '" + o.normalization + "'");
  if (o.dynamic_range == "per_pair") s.sanity.ssim.dynamic_range_mode = DynamicRangeMode::kPerPair;
  else if (o.dynamic_range == "global") s.sanity.ssim.dynamic_range_mode = DynamicRangeMode::kGlobal;
  else throw ConfigError("unknown SSIM range mode '" + o.dynamic_range + "'");
  if (o.ranking == "raw") s.faithfulness.ranking = RankingMode::kRaw;
  else if (o.ranking == "abs") s.faithfulness.ranking = RankingMode::kAbs;
  else throw ConfigError("unknown ranking '" + o.ranking + "'");
  if (o.robustness_mode == "sparse") s.robustness.mode = PerturbationMode::kSparse;
  else if (o.robustness_mode == "dense") s.robustness.mode = PerturbationMode::kDense;
  else throw ConfigError("unknown robustness mode '" + o.robustness_mode + "'");
  if (o.gamma == "one") s.localization.gamma = CardinalityMode::kOne;
  else if (o.gamma == "reciprocal") s.localization.gamma = CardinalityMode::kReciprocal;
  else throw ConfigError("unknown cardinality '" + o.gamma + "'");
  s.localization.bias = parse_bias(o.bias);
  s.localization.validate();
  if (o.dtw_band >= 0) s.stability.dtw.band_radius = static_cast<std::size_t>(o.dtw_band);
  s.robustness.seed = mix_seed(o.req.seed, 3);
  o.req.reference.train.validate();
  if (o.format.empty()) o.format = ends_with(o.out, ".csv") ? "csv" : "json";
  if (o.format != "csv" && o.format != "json") throw ConfigError("table format must be json or csv");
}

int run_evaluate(EvaluateOptions& o) {
  resolve_evaluate(o);
  auto result = tsxai::evaluate(o.req);
  for (const auto& n : result.notes) std::cerr << n << "\n";
  for (const auto& e : result.table.entries())
    if (!e.available())
      std::cerr << "unavailable: " << tsxai::to_string(e.metric) << " / " << e.method_id << ": "
                << (e.warnings.empty() ? "" : e.warnings.front()) << "\n";
  write_text(o.out, o.format == "csv" ? tsxai::render_csv(result.table) : tsxai::render_json(result.table));
  return result.table.unavailable_count() ? kExitPartial : kExitClean;
}

tsxai::ChannelFactory channel_factory(const std::string& backend_in, const std::string& dataset, std::uint64_t seed,
                                      const tsxai::ReferenceBackendConfig& ref) {
  const std::string backend = tsxai::resolve_backend(backend_in);
  if (backend == "reference") {
    const auto data = tsxai::load_evaluation_data(dataset, seed);
    const auto trained = tsxai::train_reference(data.train, ref, seed);
    auto factory = tsxai::reference::reference_factory(trained.model, trained.saliency);
    return [factory]() -> std::unique_ptr<tsxai::LineChannel> {
      return std::make_unique<tsxai::LoopbackChannel>(factory());
    };
  }
  if (backend.rfind("exec:", 0) == 0) {
    const std::string cmd = backend.substr(5);
    return [cmd]() -> std::unique_ptr<tsxai::LineChannel> { return std::make_unique<tsxai::ProcessChannel>(cmd); };
  }
  if (backend.rfind("tcp:", 0) == 0) {
    const std::string addr = backend.substr(4);
    return [addr] { return tsxai::connect_tcp(addr); };
  }
  throw tsxai::ConfigError("unknown backend '" + backend + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saliency evaluation for time-series models"};
  app.require_subcommand(1);

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Score saliency methods on a dataset");
  add_evaluate(*evaluate, eval);

  std::string in_path, out_path, format = "text";
  bool normalize = false, raw = false;
  auto* report = app.add_subcommand("report", "Render a score table");
  report->add_option("--in", in_path, "Score table (json or csv)")->required();
  report->add_flag("--normalize", normalize, "Apply per-(metric, dataset) bias normalization");
  report->add_option("--format", format, "csv | json | text | svg")->capture_default_str();
  report->add_option("--out", out_path, "Output path (default stdout)");

  auto* correlate = app.add_subcommand("correlate", "Pearson correlations between metrics");
  correlate->add_option("--in", in_path, "Score table (json or csv)")->required();
  correlate->add_flag("--raw", raw, "Correlate raw rather than bias-normalized scores");
  correlate->add_option("--format", format, "text | csv | json")->capture_default_str();
  correlate->add_option("--out", out_path, "Output path (default stdout)");

  std::string backend, dataset = "synthetic:planted_impulse,n=20,length=32";
  std::uint64_t seed = 0;
  tsxai::ReferenceBackendConfig ref;
  ref.train.epochs = 60;
  auto* check = app.add_subcommand("serve-check", "Run the protocol conformance suite against a backend");
  check->add_option("--backend", backend, "reference | exec:CMD | tcp:HOST:PORT")->default_str("");
  check->add_option("--dataset", dataset, "Training data for the reference backend")->capture_default_str();
  check->add_option("--seed", seed)->capture_default_str();

  int tcp_port = -1, max_connections = -1;
  bool stdio = false;
  tsxai::ReferenceBackendConfig serve_ref;
  auto* serve = app.add_subcommand("serve", "Serve a trained reference model over the wire protocol");
  serve->add_option("--dataset", dataset, "Training data")->capture_default_str();
  serve->add_option("--seed", seed)->capture_default_str();
  serve->add_option("--epochs", serve_ref.train.epochs)->capture_default_str();
  serve->add_flag("--stdio", stdio, "Serve one conversation on stdin/stdout");
  serve->add_option("--tcp", tcp_port, "Listen on 127.0.0.1:PORT (0 picks a free port)");
  serve->add_option("--max-connections", max_connections, "Exit after this many TCP conversations");

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitClean : kExitFailure;
  }

  try {
    if (*evaluate) return run_evaluate(eval);
    if (*report) {
      auto table = tsxai::parse_table(read_text(in_path));
      if (normalize) table = tsxai::normalize_dataset_bias(table);
      write_text(out_path, tsxai::render(table, tsxai::parse_report_format(format)));
      return kExitClean;
    }
    if (*correlate) {
      const auto table = tsxai::parse_table(read_text(in_path));
      const auto f = tsxai::parse_report_format(format);
      if (f == tsxai::ReportFormat::kSvg) throw tsxai::ConfigError("correlate renders text, csv or json");
      write_text(out_path, tsxai::render_correlation(tsxai::correlation_matrix(table, !raw), f));
      return kExitClean;
    }
    if (*check) {
      const auto results = tsxai::serve_check(channel_factory(backend, dataset, seed, ref));
      std::size_t width = 0;
      for (const auto& r : results) width = std::max(width, r.name.size());
      bool ok = true;
      for (const auto& r : results) {
        ok = ok && r.passed;
        std::string name = r.name;
        name.resize(width, ' ');
        std::cout << (r.passed ? "PASS  " : "FAIL  ") << name;
        if (!r.detail.empty()) std::cout << "  " << r.detail;
        std::cout << "\n";
      }
      return ok ? kExitClean : kExitFailure;
    }
    if (*serve) {
      if (stdio == (tcp_port >= 0)) throw tsxai::ConfigError("choose exactly one of --stdio or --tcp");
      const auto data = tsxai::load_evaluation_data(dataset, seed);
      const auto trained = tsxai::train_reference(data.train, serve_ref, seed);
      auto factory = tsxai::reference::reference_factory(trained.model, trained.saliency);
      if (stdio) {
        auto oracle = factory();
        tsxai::FdChannel ch(0, 1, false);
        tsxai::serve_conversation(*oracle, ch);
        return kExitClean;
      }
      tsxai::TcpListener listener(static_cast<unsigned short>(tcp_port));
      std::cout << "listening on 127.0.0.1:" << listener.port() << std::endl;
      listener.serve(factory, max_connections >= 0 ? std::optional<int>(max_connections) : std::nullopt);
      return kExitClean;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
