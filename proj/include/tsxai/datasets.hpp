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

// Dataset ingestion (UCR-style text files, multichannel manifests) and
// seeded synthetic generators with known informative cells.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tsxai/core.hpp"

namespace tsxai {

/// Malformed input file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace datasets_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Splits on tabs when present, otherwise commas.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  const char sep = line.find('\t') != std::string_view::npos ? '\t' : ',';
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view field, std::size_t line_no, std::size_t col) {
  const std::string s(field);
  char* end = nullptr;
  const double v = s.empty() ? 0.0 : std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ", field " + std::to_string(col + 1) +
                     ": non-numeric cell '" + s + "'");
  return v;
}

inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::vector<std::string> read_file_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_lines(in);
}

/// Parses a table of numeric rows; returns (line number, fields) per row.
inline std::vector<std::pair<std::size_t, std::vector<double>>> numeric_rows(
    const std::vector<std::string>& lines) {
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  std::optional<std::size_t> width;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (width && fields.size() != *width)
      throw ParseError("line " + std::to_string(i + 1) + ": ragged row with " +
                       std::to_string(fields.size()) + " fields, expected " + std::to_string(*width));
    width = fields.size();
    std::vector<double> vals;
    vals.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) vals.push_back(parse_number(fields[c], i + 1, c));
    rows.emplace_back(i + 1, std::move(vals));
  }
  return rows;
}

/// Dense re-indexing of raw label values in ascending order.
inline std::vector<ClassLabel> reindex(const std::vector<double>& raw, int* num_classes) {
  const std::set<double> uniq(raw.begin(), raw.end());
  if (uniq.size() < 2) throw ParseError("labels contain a single class");
  std::map<double, int> index;
  for (double v : uniq) index.emplace(v, static_cast<int>(index.size()));
  std::vector<ClassLabel> out;
  out.reserve(raw.size());
  for (double v : raw) out.push_back(ClassLabel{index.at(v)});
  *num_classes = static_cast<int>(uniq.size());
  return out;
}

}  // namespace datasets_detail

/// UCR layout: one sample per line, class label first, then T values; tab or
/// comma separated. Labels are re-indexed densely to [0, C).
inline Dataset parse_ucr(std::istream& in, const std::string& name) {
  using namespace datasets_detail;
  const auto rows = numeric_rows(read_lines(in));
  if (rows.empty()) throw ParseError("'" + name + "' has no rows");
  if (rows.front().second.size() < 3) throw ParseError("'" + name + "' rows need a label and T >= 2 values");
  std::vector<double> raw;
  std::vector<TimeSeriesSample> samples;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& vals = rows[i].second;
    raw.push_back(vals[0]);
    samples.emplace_back(Matrix(1, vals.size() - 1, std::vector<double>(vals.begin() + 1, vals.end())),
                         name + "#" + std::to_string(i));
  }
  int classes = 0;
  auto labels = reindex(raw, &classes);
  return Dataset::classification(name, std::move(samples), std::move(labels), classes);
}

inline Dataset load_ucr_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return parse_ucr(in, path.stem().string());
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes a univariate classification dataset in UCR layout (label indices,
/// tab separated, 17 significant digits).
inline void write_ucr(std::ostream& out, const Dataset& d) {
  if (d.task_kind() != TaskKind::kClassification || d.channels() != 1)
    throw InvariantError("UCR layout holds univariate classification data only");
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << d.labels()[i].index;
    for (double v : d.sample(i).values().flat()) out << '\t' << format_double(v);
    out << '\n';
  }
}

/// Per sample, per channel: subtract the mean and divide by the population
/// std; channels with std < 1e-8 are only centered.
inline Dataset znormalize(const Dataset& d) {
  std::vector<TimeSeriesSample> out;
  out.reserve(d.size());
  for (const auto& s : d.samples()) {
    Matrix m = s.values();
    for (std::size_t h = 0; h < m.rows(); ++h) {
      double mean = 0.0;
      for (std::size_t t = 0; t < m.cols(); ++t) mean += m(h, t);
      mean /= static_cast<double>(m.cols());
      double var = 0.0;
      for (std::size_t t = 0; t < m.cols(); ++t) var += (m(h, t) - mean) * (m(h, t) - mean);
      const double sd = std::sqrt(var / static_cast<double>(m.cols()));
      for (std::size_t t = 0; t < m.cols(); ++t) m(h, t) = sd < 1e-8 ? m(h, t) - mean : (m(h, t) - mean) / sd;
    }
    out.push_back(s.with_values(std::move(m)));
  }
  return d.with_samples(std::move(out));
}

enum class SyntheticKind { kPlantedImpulse, kPlantedBlock, kScatteredPair, kSegmentationRuns };

inline std::string_view to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::kPlantedImpulse: return "planted_impulse";
    case SyntheticKind::kPlantedBlock: return "planted_block";
    case SyntheticKind::kScatteredPair: return "scattered_pair";
    case SyntheticKind::kSegmentationRuns: return "segmentation_runs";
  }
  return "?";
}

inline SyntheticKind parse_synthetic_kind(std::string_view s) {
  for (auto k : {SyntheticKind::kPlantedImpulse, SyntheticKind::kPlantedBlock, SyntheticKind::kScatteredPair,
                 SyntheticKind::kSegmentationRuns})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown synthetic kind '" + std::string(s) + "'");
}

struct FeatureRange {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
};

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kPlantedImpulse;
  std::size_t n = 40;
  std::size_t channels = 1;
  std::size_t length = 64;
  int num_classes = 2;
  double noise_std = 0.3;
  double amplitude = 3.0;
  std::uint64_t seed = 0;
  // Per class; defaults are spread evenly along the series when empty.
  std::vector<FeatureRange> feature_positions;
  std::size_t block_len = 0;  // planted_block width; 0 picks T / 8
  std::size_t min_run = 5;    // segmentation_runs
};

struct GeneratedDataset {
  Dataset data;
  // Per sample, H x T, 1 where the planted signal lives.
  std::vector<Matrix> informative;
};

/// Signed pattern level for class k: +a, -a, +2a, -2a, ...
inline double class_level(int k, double amplitude) {
  return (k % 2 == 0 ? 1.0 : -1.0) * amplitude * (1.0 + static_cast<double>(k / 2));
}

/// Default per-class feature ranges for a classification kind.
inline std::vector<FeatureRange> default_feature_positions(const SyntheticSpec& s) {
  std::vector<FeatureRange> out;
  const std::size_t width = s.kind == SyntheticKind::kPlantedBlock
                                ? (s.block_len ? s.block_len : std::max<std::size_t>(2, s.length / 8))
                                : 1;
  for (int k = 0; k < s.num_classes; ++k) {
    std::size_t start;
    if (s.kind == SyntheticKind::kScatteredPair) {
      start = s.length * static_cast<std::size_t>(k + 1) / (2 * static_cast<std::size_t>(s.num_classes) + 2);
    } else {
      // Shared location; classes differ only in the signed level.
      const std::size_t center = s.length / 2;
      start = center >= width / 2 ? center - width / 2 : 0;
    }
    out.push_back({start, start + width});
  }
  return out;
}

inline GeneratedDataset generate(const SyntheticSpec& spec) {
  if (spec.num_classes < 2) throw ConfigError("synthetic data needs C >= 2");
  if (spec.n < 2 || spec.channels < 1 || spec.length < 2) throw ConfigError("synthetic data needs N, T >= 2 and H >= 1");
  if (spec.noise_std < 0.0) throw ConfigError("noise_std must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::string prefix = std::string(to_string(spec.kind)) + "-" + std::to_string(spec.seed) + "-";

  auto noisy = [&]() {
    Matrix m(spec.channels, spec.length);
    for (double& v : m.flat()) v = spec.noise_std * noise(rng);
    return m;
  };

  std::vector<TimeSeriesSample> samples;
  std::vector<Matrix> masks;

  if (spec.kind == SyntheticKind::kSegmentationRuns) {
    if (spec.min_run < 1 || spec.min_run > spec.length) throw ConfigError("min_run must be in [1, T]");
    std::vector<DenseLabels> dense;
    const std::size_t max_run = std::max(spec.min_run, spec.length / 4);
    std::uniform_int_distribution<std::size_t> run_len(spec.min_run, max_run);
    std::uniform_int_distribution<std::size_t> gap_len(2, std::max<std::size_t>(2, spec.min_run));
    for (std::size_t i = 0; i < spec.n; ++i) {
      Matrix x = noisy();
      Matrix mask(spec.channels, spec.length);
      DenseLabels labels(spec.length);
      std::size_t t = gap_len(rng) / 2;
      int cls = static_cast<int>(i % static_cast<std::size_t>(spec.num_classes));
      while (t + spec.min_run <= spec.length) {
        const std::size_t end = std::min(spec.length, t + run_len(rng));
        const std::size_t h = static_cast<std::size_t>(cls) % spec.channels;
        for (std::size_t u = t; u < end; ++u) {
          labels[u] = cls;
          x(h, u) += class_level(cls, spec.amplitude);
          mask(h, u) = 1.0;
        }
        t = end + gap_len(rng);
        cls = (cls + 1) % spec.num_classes;
      }
      samples.emplace_back(std::move(x), prefix + std::to_string(i));
      masks.push_back(std::move(mask));
      dense.push_back(std::move(labels));
    }
    std::vector<bool> seen(static_cast<std::size_t>(spec.num_classes), false);
    for (const auto& d : dense)
      for (const auto& l : d)
        if (l) seen[static_cast<std::size_t>(*l)] = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw ConfigError("segmentation spec too short to contain every class");
    return {Dataset::segmentation("synthetic:" + std::string(to_string(spec.kind)), std::move(samples),
                                  std::move(dense), spec.num_classes),
            std::move(masks)};
  }

  auto positions = spec.feature_positions.empty() ? default_feature_positions(spec) : spec.feature_positions;
  if (positions.size() != static_cast<std::size_t>(spec.num_classes))
    throw ConfigError("feature_positions needs one range per class");
  for (const auto& p : positions) {
    if (p.start >= p.end || p.end > spec.length)
      throw ConfigError("feature range [" + std::to_string(p.start) + ", " + std::to_string(p.end) +
                        ") does not fit in T = " + std::to_string(spec.length));
    if (spec.kind == SyntheticKind::kScatteredPair && p.start + spec.length / 2 >= spec.length)
      throw ConfigError("scattered_pair partner cell falls outside the series");
  }

  std::vector<ClassLabel> labels;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int cls = static_cast<int>(i % static_cast<std::size_t>(spec.num_classes));
    const auto& pos = positions[static_cast<std::size_t>(cls)];
    const std::size_t h = static_cast<std::size_t>(cls) % spec.channels;
    const double level = class_level(cls, spec.amplitude);
    Matrix x = noisy();
    Matrix mask(spec.channels, spec.length);
    auto plant = [&](std::size_t t) {
      x(h, t) += level;
      mask(h, t) = 1.0;
    };
    for (std::size_t t = pos.start; t < pos.end; ++t) {
      plant(t);
      if (spec.kind == SyntheticKind::kScatteredPair) plant(t + spec.length / 2);
    }
    samples.emplace_back(std::move(x), prefix + std::to_string(i));
    masks.push_back(std::move(mask));
    labels.push_back(ClassLabel{cls});
  }
  return {Dataset::classification("synthetic:" + std::string(to_string(spec.kind)), std::move(samples),
                                  std::move(labels), spec.num_classes),
          std::move(masks)};
}

/// Training and optional held-out split described by a manifest.
struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;
};

namespace datasets_detail {

/// "a:b" half-open range or comma list of row indices.
inline std::vector<std::size_t> parse_rows(const std::string& spec, std::size_t n) {
  std::vector<std::size_t> rows;
  const auto colon = spec.find(':');
  auto to_index = [&](std::string_view s) {
    std::size_t v = 0;
    s = trim(s);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ParseError("bad row index '" + std::string(s) + "'");
    return v;
  };
  if (colon != std::string::npos) {
    const std::size_t a = to_index(std::string_view(spec).substr(0, colon));
    const std::size_t b = to_index(std::string_view(spec).substr(colon + 1));
    for (std::size_t i = a; i < b; ++i) rows.push_back(i);
  } else {
    for (auto f : split_fields(spec)) rows.push_back(to_index(f));
  }
  for (auto r : rows)
    if (r >= n) throw ParseError("split row " + std::to_string(r) + " out of range");
  return rows;
}

}  // namespace datasets_detail

/// Key-value manifest:
///   name = gestures
///   task_kind = classification | segmentation
///   ucr = data.tsv                  (univariate, UCR layout), or
///   channels = ch0.tsv, ch1.tsv     (one row of T values per sample)
///   labels = labels.txt             (one label per line; segmentation: T per line, `none` allowed)
///   classes = 3                     (segmentation only, optional)
///   train = 0:40                    (optional, default all rows)
///   test = 40:60                    (optional)
/// Relative paths resolve against the manifest's directory.
inline LoadedData load_manifest(const std::filesystem::path& path) {
  using namespace datasets_detail;
  std::map<std::string, std::string> kv;
  const auto lines = read_file_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": expected key = value");
    kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  const auto dir = path.parent_path();
  auto resolve = [&](std::string_view f) { return dir / std::filesystem::path(std::string(trim(f))); };
  const std::string name = kv.count("name") ? kv["name"] : path.stem().string();
  const TaskKind kind = kv.count("task_kind") ? parse_task_kind(kv["task_kind"]) : TaskKind::kClassification;

  Dataset all;
  if (kv.count("ucr")) {
    std::ifstream in(resolve(kv["ucr"]));
    if (!in) throw ParseError("cannot open '" + resolve(kv["ucr"]).string() + "'");
    all = parse_ucr(in, name);
  } else {
    if (!kv.count("channels") || !kv.count("labels"))
      throw ParseError("manifest needs `ucr` or both `channels` and `labels`");
    std::vector<std::vector<std::vector<double>>> per_channel;
    for (auto f : split_fields(kv["channels"])) {
      std::vector<std::vector<double>> rows;
      for (auto& [ln, vals] : numeric_rows(read_file_lines(resolve(f)))) rows.push_back(std::move(vals));
      per_channel.push_back(std::move(rows));
    }
    const std::size_t n = per_channel.front().size();
    for (const auto& c : per_channel)
      if (c.size() != n || c.empty() || c.front().size() != per_channel.front().front().size())
        throw ParseError("channel files disagree on sample count or length");
    const std::size_t h = per_channel.size(), t = per_channel.front().front().size();
    std::vector<TimeSeriesSample> samples;
    for (std::size_t i = 0; i < n; ++i) {
      Matrix m(h, t);
      for (std::size_t c = 0; c < h; ++c)
        for (std::size_t u = 0; u < t; ++u) m(c, u) = per_channel[c][i][u];
      samples.emplace_back(std::move(m), name + "#" + std::to_string(i));
    }
    const auto label_lines = read_file_lines(resolve(kv["labels"]));
    std::vector<std::string> nonempty;
    for (const auto& l : label_lines)
      if (!trim(l).empty()) nonempty.push_back(l);
    if (nonempty.size() != n) throw ParseError("labels file has " + std::to_string(nonempty.size()) + " rows, expected " + std::to_string(n));
    if (kind == TaskKind::kClassification) {
      std::vector<double> raw;
      for (std::size_t i = 0; i < n; ++i) raw.push_back(parse_number(trim(nonempty[i]), i + 1, 0));
      int classes = 0;
      auto labels = reindex(raw, &classes);
      all = Dataset::classification(name, std::move(samples), std::move(labels), classes);
    } else {
      std::vector<DenseLabels> dense;
      int max_label = -1;
      for (std::size_t i = 0; i < n; ++i) {
        DenseLabels d;
        for (auto f : split_fields(nonempty[i])) {
          if (f == "none" || f == "-") {
            d.push_back(std::nullopt);
          } else {
            const double v = parse_number(f, i + 1, d.size());
            if (v < 0 || v != std::floor(v)) throw ParseError("dense label must be a non-negative integer or `none`");
            d.push_back(static_cast<int>(v));
            max_label = std::max(max_label, static_cast<int>(v));
          }
        }
        if (d.size() != t) throw ParseError("labels row " + std::to_string(i + 1) + " has the wrong length");
        dense.push_back(std::move(d));
      }
      const int classes = kv.count("classes") ? std::stoi(kv["classes"]) : max_label + 1;
      all = Dataset::segmentation(name, std::move(samples), std::move(dense), classes);
    }
  }

  LoadedData out{all, std::nullopt};
  if (kv.count("train")) {
    const auto rows = parse_rows(kv["train"], all.size());
    out.train = all.subset(rows, name);
  }
  if (kv.count("test")) {
    const auto rows = parse_rows(kv["test"], all.size());
    out.test = all.subset(rows, name);
  }
  return out;
}

}  // namespace tsxai
