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

// Score tables, per-(metric, dataset) bias normalization, metric
// correlations and rendered artifacts.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tsxai/core.hpp"

namespace tsxai {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScoreKey {
  MetricId metric;
  std::string method;
  std::string dataset;
  std::string model_state;

  auto tie() const { return std::tie(metric, method, dataset, model_state); }
  bool operator<(const ScoreKey& o) const { return tie() < o.tie(); }
  bool operator==(const ScoreKey& o) const { return tie() == o.tie(); }
};

inline ScoreKey key_of(const MetricScore& s) { return {s.metric, s.method_id, s.dataset, s.model_state}; }

/// Insertion-ordered collection of scores with unique keys.
class ScoreTable {
 public:
  void add(MetricScore s) {
    if (s.config_digest.empty()) throw InvariantError("score entries must carry a config digest");
    if (!keys_.insert(key_of(s)).second)
      throw InvariantError("duplicate score for " + std::string(to_string(s.metric)) + "/" + s.method_id + "/" +
                           s.dataset + "/" + s.model_state);
    entries_.push_back(std::move(s));
  }

  const std::vector<MetricScore>& entries() const { return entries_; }
  std::vector<MetricScore>& mutable_entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::map<std::string, std::string>& provenance() { return provenance_; }
  const std::map<std::string, std::string>& provenance() const { return provenance_; }

  const MetricScore* find(const ScoreKey& k) const {
    for (const auto& e : entries_)
      if (key_of(e) == k) return &e;
    return nullptr;
  }

  std::size_t unavailable_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](const MetricScore& s) { return !s.available(); }));
  }

 private:
  std::vector<MetricScore> entries_;
  std::set<ScoreKey> keys_;
  std::map<std::string, std::string> provenance_;
};

/// Standardizes each (metric, dataset, model_state) group of available
/// scores to mean 0 and population variance 1. Zero-variance and
/// single-method groups become zeros with a warning.
inline ScoreTable normalize_dataset_bias(const ScoreTable& table) {
  ScoreTable out = table;
  std::map<std::tuple<MetricId, std::string, std::string>, std::vector<std::size_t>> groups;
  auto& entries = out.mutable_entries();
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].available())
      groups[{entries[i].metric, entries[i].dataset, entries[i].model_state}].push_back(i);
  for (const auto& [key, idx] : groups) {
    const double n = static_cast<double>(idx.size());
    double mean = 0.0;
    for (auto i : idx) mean += entries[i].value;
    mean /= n;
    double var = 0.0;
    for (auto i : idx) var += (entries[i].value - mean) * (entries[i].value - mean);
    const double sd = std::sqrt(var / n);
    const bool flat = idx.size() < 2 || !(sd > 1e-15 * std::max(1.0, std::fabs(mean)));
    for (auto i : idx) {
      if (flat) {
        entries[i].value = 0.0;
        entries[i].warnings.push_back(idx.size() < 2 ? "normalization group has a single method"
                                                     : "normalization group has zero variance");
      } else {
        entries[i].value = (entries[i].value - mean) / sd;
      }
    }
  }
  out.provenance()["normalized"] = "dataset_bias";
  return out;
}

struct CorrelationMatrix {
  std::vector<MetricId> metrics;
  Matrix r;                           // NaN marks masked pairs
  std::vector<std::size_t> counts;    // observations per pair, row-major

  std::size_t count(std::size_t a, std::size_t b) const { return counts[a * metrics.size() + b]; }
  bool masked(std::size_t a, std::size_t b) const { return std::isnan(r(a, b)); }
};

/// Pearson coefficient by streaming co-moment updates. NaN when fewer than
/// three observations or either side has no variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvariantError("pearson inputs differ in length");
  if (x.size() < 3) return std::nan("");
  double mx = 0.0, my = 0.0, cxx = 0.0, cyy = 0.0, cxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double n = static_cast<double>(k + 1);
    const double dx = x[k] - mx, dy = y[k] - my;
    mx += dx / n;
    my += dy / n;
    cxx += dx * (x[k] - mx);
    cyy += dy * (y[k] - my);
    cxy += dx * (y[k] - my);
  }
  if (!(cxx > 0.0) || !(cyy > 0.0)) return std::nan("");
  return std::clamp(cxy / std::sqrt(cxx * cyy), -1.0, 1.0);
}

/// Correlations between metrics over paired (method, dataset, model_state)
/// observations. Scores are bias-normalized first unless `normalize` is off.
inline CorrelationMatrix correlation_matrix(const ScoreTable& table, bool normalize = true) {
  const ScoreTable t = normalize ? normalize_dataset_bias(table) : table;
  using Obs = std::tuple<std::string, std::string, std::string>;
  std::map<MetricId, std::map<Obs, double>> by_metric;
  for (const auto& e : t.entries())
    if (e.available()) by_metric[e.metric][{e.method_id, e.dataset, e.model_state}] = e.value;
  CorrelationMatrix cm;
  for (MetricId m : kAllMetrics)
    if (by_metric.count(m)) cm.metrics.push_back(m);
  const std::size_t k = cm.metrics.size();
  cm.r = Matrix(k, k);
  cm.counts.assign(k * k, 0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      const auto& A = by_metric[cm.metrics[a]];
      const auto& B = by_metric[cm.metrics[b]];
      std::vector<double> xa, xb;
      for (const auto& [obs, v] : A) {
        auto it = B.find(obs);
        if (it == B.end()) continue;
        xa.push_back(v);
        xb.push_back(it->second);
      }
      cm.counts[a * k + b] = xa.size();
      cm.r(a, b) = a == b ? 1.0 : pearson(xa, xb);
    }
  return cm;
}

// ---------------------------------------------------------------------------
// Rendering

namespace report_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%+.*f", digits, v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw ReportError("unterminated quote in CSV line");
  return out;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Mean normalized score per (metric, method) across datasets.
struct Grid {
  std::vector<MetricId> metrics;
  std::vector<std::string> methods;
  Matrix value;                 // NaN where no available score
};

inline Grid heat_grid(const ScoreTable& table) {
  const ScoreTable t = normalize_dataset_bias(table);
  Grid g;
  std::vector<std::string> methods;
  std::set<MetricId> present;
  for (const auto& e : t.entries()) {
    if (std::find(methods.begin(), methods.end(), e.method_id) == methods.end()) methods.push_back(e.method_id);
    present.insert(e.metric);
  }
  for (MetricId m : kAllMetrics)
    if (present.count(m)) g.metrics.push_back(m);
  g.methods = methods;
  g.value = Matrix(g.metrics.size(), g.methods.size());
  for (std::size_t a = 0; a < g.metrics.size(); ++a)
    for (std::size_t b = 0; b < g.methods.size(); ++b) {
      double s = 0.0;
      int n = 0;
      for (const auto& e : t.entries())
        if (e.available() && e.metric == g.metrics[a] && e.method_id == g.methods[b]) {
          s += e.value;
          ++n;
        }
      g.value(a, b) = n ? s / n : std::nan("");
    }
  return g;
}

}  // namespace report_detail

inline constexpr std::string_view kCsvHeader = "metric,method,dataset,model_state,value";

/// CSV with one row per entry; unavailable scores are written as NA.
inline std::string render_csv(const ScoreTable& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& e : table.entries()) {
    out += std::string(to_string(e.metric)) + ',' + report_detail::csv_field(e.method_id) + ',' +
           report_detail::csv_field(e.dataset) + ',' + report_detail::csv_field(e.model_state) + ',' +
           (e.available() ? report_detail::num(e.value) : std::string("NA")) + '\n';
  }
  return out;
}

inline ScoreTable parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ReportError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ReportError("unexpected CSV header '" + line + "'");
  ScoreTable t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = report_detail::split_csv_line(line);
    if (f.size() != 5) throw ReportError("line " + std::to_string(lineno) + ": expected 5 fields");
    MetricScore s;
    try {
      s.metric = parse_metric_id(f[0]);
    } catch (const ConfigError& e) {
      throw ReportError("line " + std::to_string(lineno) + ": " + e.what());
    }
    s.method_id = f[1];
    s.dataset = f[2];
    s.model_state = f[3];
    if (f[4] == "NA") {
      s.status = ScoreStatus::kUnavailable;
    } else {
      std::size_t used = 0;
      try {
        s.value = std::stod(f[4], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != f[4].size() || f[4].empty())
        throw ReportError("line " + std::to_string(lineno) + ": bad value '" + f[4] + "'");
    }
    s.config_digest = hex_digest("csv|" + line);
    t.add(std::move(s));
  }
  return t;
}

inline nlohmann::json to_json(const ScoreTable& table) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : table.entries()) {
    nlohmann::json j;
    j["metric"] = std::string(to_string(e.metric));
    j["method"] = e.method_id;
    j["dataset"] = e.dataset;
    j["model_state"] = e.model_state;
    j["status"] = e.available() ? "ok" : "unavailable";
    j["value"] = e.available() ? nlohmann::json(e.value) : nlohmann::json(nullptr);
    j["config_digest"] = e.config_digest;
    j["warnings"] = e.warnings;
    j["diagnostics"] = e.diagnostics;
    j["per_sample"] = nlohmann::json::array();
    for (double v : e.per_sample) j["per_sample"].push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    entries.push_back(std::move(j));
  }
  return {{"entries", entries}, {"provenance", table.provenance()}};
}

inline std::string render_json(const ScoreTable& table) { return to_json(table).dump(2) + "\n"; }

inline ScoreTable parse_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(std::string("invalid JSON table: ") + e.what());
  }
  ScoreTable t;
  try {
    for (const auto& j : doc.at("entries")) {
      MetricScore s;
      s.metric = parse_metric_id(j.at("metric").get<std::string>());
      s.method_id = j.at("method").get<std::string>();
      s.dataset = j.at("dataset").get<std::string>();
      s.model_state = j.at("model_state").get<std::string>();
      s.status = j.at("status").get<std::string>() == "ok" ? ScoreStatus::kOk : ScoreStatus::kUnavailable;
      if (s.available()) s.value = j.at("value").get<double>();
      s.config_digest = j.at("config_digest").get<std::string>();
      if (j.contains("warnings")) s.warnings = j["warnings"].get<std::vector<std::string>>();
      if (j.contains("diagnostics")) s.diagnostics = j["diagnostics"].get<std::map<std::string, double>>();
      if (j.contains("per_sample"))
        for (const auto& v : j["per_sample"]) s.per_sample.push_back(v.is_null() ? std::nan("") : v.get<double>());
      t.add(std::move(s));
    }
    if (doc.contains("provenance")) t.provenance() = doc["provenance"].get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(std::string("malformed JSON table: ") + e.what());
  } catch (const ConfigError& e) {
    throw ReportError(e.what());
  }
  return t;
}

/// Reads either a JSON or a CSV table.
inline ScoreTable parse_table(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json(text);
  std::istringstream in(text);
  return parse_csv(in);
}

/// Character heat map: rows are metrics, columns methods, brighter glyphs
/// mark higher mean normalized scores.
inline std::string render_text_heatmap(const ScoreTable& table) {
  static constexpr std::string_view kRamp = " .:-=+*#%@";
  const auto g = report_detail::heat_grid(table);
  if (g.metrics.empty()) return "(empty table)\n";
  double lo = INFINITY, hi = -INFINITY;
  for (double v : g.value.flat())
    if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  std::size_t name_w = 6;
  for (auto m : g.metrics) name_w = std::max(name_w, to_string(m).size());
  std::size_t col_w = 8;
  for (const auto& m : g.methods) col_w = std::max(col_w, m.size() + 1);
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::string out = pad("metric", name_w) + " |";
  for (const auto& m : g.methods) out += " " + pad(m, col_w);
  out += "\n" + std::string(name_w, '-') + "-+" + std::string(g.methods.size() * (col_w + 1), '-') + "\n";
  for (std::size_t a = 0; a < g.metrics.size(); ++a) {
    out += pad(std::string(to_string(g.metrics[a])), name_w) + " |";
    for (std::size_t b = 0; b < g.methods.size(); ++b) {
      const double v = g.value(a, b);
      std::string cell;
      if (!std::isfinite(v)) {
        cell = "  n/a";
      } else {
        const double u = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        const auto k = std::min<std::size_t>(kRamp.size() - 1, static_cast<std::size_t>(u * kRamp.size()));
        cell = std::string(1, kRamp[k]) + " " + report_detail::fixed(v, 2);
      }
      out += " " + pad(cell, col_w);
    }
    out += "\n";
  }
  return out;
}

/// Self-contained SVG heat map with the same layout as the text view.
inline std::string render_svg_heatmap(const ScoreTable& table) {
  const auto g = report_detail::heat_grid(table);
  constexpr int kCell = 48, kLeft = 140, kTop = 90;
  const int w = kLeft + kCell * static_cast<int>(g.methods.size()) + 20;
  const int h = kTop + kCell * static_cast<int>(g.metrics.size()) + 20;
  double lo = INFINITY, hi = -INFINITY;
  for (double v : g.value.flat())
    if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << ' ' << h << "\" font-family=\"monospace\" font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t b = 0; b < g.methods.size(); ++b) {
    const int x = kLeft + kCell * static_cast<int>(b) + kCell / 2;
    s << "<text x=\"" << x << "\" y=\"" << kTop - 6 << "\" transform=\"rotate(-45 " << x << ' ' << kTop - 6
      << ")\">" << report_detail::xml_escape(g.methods[b]) << "</text>\n";
  }
  for (std::size_t a = 0; a < g.metrics.size(); ++a) {
    const int y = kTop + kCell * static_cast<int>(a);
    s << "<text x=\"4\" y=\"" << y + kCell / 2 + 4 << "\">" << to_string(g.metrics[a]) << "</text>\n";
    for (std::size_t b = 0; b < g.methods.size(); ++b) {
      const int x = kLeft + kCell * static_cast<int>(b);
      const double v = g.value(a, b);
      std::string fill = "#dddddd";
      if (std::isfinite(v)) {
        const double u = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        char buf[8];
        const int level = static_cast<int>(std::lround(u * 255.0));
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", level, level, level);
        fill = buf;
      }
      s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\""
        << fill << "\" stroke=\"#888888\"><title>" << to_string(g.metrics[a]) << " / "
        << report_detail::xml_escape(g.methods[b]) << ": "
        << (std::isfinite(v) ? report_detail::fixed(v, 4) : std::string("n/a")) << "</title></rect>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

enum class ReportFormat { kCsv, kJson, kText, kSvg };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  if (s == "text" || s == "text-heatmap") return ReportFormat::kText;
  if (s == "svg" || s == "svg-heatmap") return ReportFormat::kSvg;
  throw ConfigError("unknown report format '" + std::string(s) + "'");
}

inline std::string render(const ScoreTable& table, ReportFormat f) {
  switch (f) {
    case ReportFormat::kCsv: return render_csv(table);
    case ReportFormat::kJson: return render_json(table);
    case ReportFormat::kText: return render_text_heatmap(table);
    case ReportFormat::kSvg: return render_svg_heatmap(table);
  }
  return {};
}

/// Correlation matrix as text or CSV; masked cells print as NA.
inline std::string render_correlation(const CorrelationMatrix& cm, ReportFormat f) {
  const std::size_t k = cm.metrics.size();
  std::string out;
  if (f == ReportFormat::kCsv) {
    out = "metric";
    for (auto m : cm.metrics) out += "," + std::string(to_string(m));
    out += "\n";
    for (std::size_t a = 0; a < k; ++a) {
      out += std::string(to_string(cm.metrics[a]));
      for (std::size_t b = 0; b < k; ++b) out += "," + (cm.masked(a, b) ? std::string("NA") : report_detail::num(cm.r(a, b)));
      out += "\n";
    }
    return out;
  }
  if (f == ReportFormat::kJson) {
    nlohmann::json j;
    j["metrics"] = nlohmann::json::array();
    for (auto m : cm.metrics) j["metrics"].push_back(std::string(to_string(m)));
    j["r"] = nlohmann::json::array();
    for (std::size_t a = 0; a < k; ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t b = 0; b < k; ++b) row.push_back(cm.masked(a, b) ? nlohmann::json(nullptr) : nlohmann::json(cm.r(a, b)));
      j["r"].push_back(row);
    }
    return j.dump(2) + "\n";
  }
  if (k == 0) return "(empty table)\n";
  std::size_t w = 6;
  for (auto m : cm.metrics) w = std::max(w, to_string(m).size());
  auto pad = [](std::string s, std::size_t n) {
    s.resize(std::max(s.size(), n), ' ');
    return s;
  };
  out = pad("", w) + " |";
  for (std::size_t b = 0; b < k; ++b) out += " " + pad("m" + std::to_string(b), 6);
  out += "\n";
  for (std::size_t a = 0; a < k; ++a) {
    out += pad(std::string(to_string(cm.metrics[a])), w) + " |";
    for (std::size_t b = 0; b < k; ++b)
      out += " " + pad(cm.masked(a, b) ? std::string("   NA") : report_detail::fixed(cm.r(a, b), 2), 6);
    out += "  m" + std::to_string(a) + "\n";
  }
  return out;
}

}  // namespace tsxai
