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

#include "tsxai/report.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace tsxai {
namespace {

const std::filesystem::path kGolden = std::filesystem::path(TSXAI_TEST_DATA_DIR) / "golden";

MetricScore entry(MetricId m, const std::string& method, const std::string& dataset, double v) {
  MetricScore s;
  s.metric = m;
  s.method_id = method;
  s.dataset = dataset;
  s.value = v;
  s.config_digest = hex_digest(std::string(to_string(m)) + method + dataset);
  return s;
}

MetricScore missing(MetricId m, const std::string& method, const std::string& dataset, const std::string& why) {
  auto s = MetricScore::unavailable(m, method, dataset, why);
  s.config_digest = hex_digest("na" + method + dataset);
  return s;
}

// Small hand-written table used by the golden renderings.
ScoreTable sample_table() {
  ScoreTable t;
  const std::vector<std::string> methods = {"gradient", "occlusion", "random"};
  const std::vector<std::string> datasets = {"impulse", "block"};
  const double base[3][2] = {{-0.25, -0.5}, {-0.75, -0.125}, {-1.0, -0.875}};
  for (std::size_t a = 0; a < methods.size(); ++a)
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      t.add(entry(MetricId::kSanity, methods[a], datasets[d], base[a][d]));
      auto ti = entry(MetricId::kFaithfulnessTi, methods[a], datasets[d], -0.5 + 0.125 * static_cast<double>(a + d));
      ti.per_sample = {ti.value - 0.0625, ti.value + 0.0625};
      ti.diagnostics["spread"] = 0.0625;
      t.add(ti);
    }
  t.add(missing(MetricId::kLocalization, "gradient", "impulse", "localization needs a segmentation dataset"));
  t.provenance()["seed"] = "7";
  return t;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void expect_golden(const std::string& name, const std::string& actual) {
  const auto path = kGolden / name;
  if (std::getenv("TSXAI_UPDATE_GOLDEN")) {
    std::filesystem::create_directories(kGolden);
    std::ofstream(path, std::ios::binary) << actual;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << path;
  EXPECT_EQ(actual, slurp(path)) << name;
}

// Textbook two-pass formula, kept apart from the streaming implementation.
double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += x[k] / n, my += y[k] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

TEST(ScoreTableTest, RejectsDuplicatesAndMissingDigests) {
  ScoreTable t;
  t.add(entry(MetricId::kSanity, "a", "d", 1.0));
  EXPECT_THROW(t.add(entry(MetricId::kSanity, "a", "d", 2.0)), InvariantError);
  auto other_state = entry(MetricId::kSanity, "a", "d", 2.0);
  other_state.model_state = "cascade-1-1";
  EXPECT_NO_THROW(t.add(other_state));
  auto blank = entry(MetricId::kSanity, "b", "d", 1.0);
  blank.config_digest.clear();
  EXPECT_THROW(t.add(blank), InvariantError);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_NE(t.find({MetricId::kSanity, "a", "d", "trained"}), nullptr);
  EXPECT_EQ(t.find({MetricId::kSanity, "z", "d", "trained"}), nullptr);
}

TEST(NormalizationTest, TwoMethodsBecomeMinusOneAndOne) {
  ScoreTable t;
  t.add(entry(MetricId::kSanity, "a", "d", 0.2));
  t.add(entry(MetricId::kSanity, "b", "d", 0.8));
  const auto n = normalize_dataset_bias(t);
  EXPECT_NEAR(n.entries()[0].value, -1.0, 1e-12);
  EXPECT_NEAR(n.entries()[1].value, 1.0, 1e-12);
  EXPECT_EQ(n.provenance().at("normalized"), "dataset_bias");
}

TEST(NormalizationTest, GroupsHaveZeroMeanUnitVariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  ScoreTable t;
  for (MetricId m : kAllMetrics)
    for (const char* d : {"x", "y", "z"})
      for (const char* method : {"a", "b", "c", "e"}) t.add(entry(m, method, d, u(rng) * (1 + static_cast<int>(m))));
  const auto n = normalize_dataset_bias(t);
  std::map<std::pair<MetricId, std::string>, std::vector<double>> groups;
  for (const auto& e : n.entries()) groups[{e.metric, e.dataset}].push_back(e.value);
  for (const auto& [key, v] : groups) {
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    for (double x : v) var += (x - mean) * (x - mean) / static_cast<double>(v.size());
    EXPECT_LE(std::fabs(mean), 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-9);
  }
  // Idempotent up to rounding.
  const auto twice = normalize_dataset_bias(n);
  for (std::size_t i = 0; i < n.size(); ++i) EXPECT_NEAR(twice.entries()[i].value, n.entries()[i].value, 1e-12);
}

TEST(NormalizationTest, DegenerateGroupsBecomeZeroWithWarning) {
  ScoreTable t;
  t.add(entry(MetricId::kSanity, "a", "d", 0.4));
  t.add(entry(MetricId::kSanity, "b", "d", 0.4));
  t.add(entry(MetricId::kRobustness, "a", "d", -3.0));
  t.add(missing(MetricId::kRobustness, "b", "d", "no"));
  const auto n = normalize_dataset_bias(t);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(n.entries()[i].value, 0.0);
    EXPECT_FALSE(n.entries()[i].warnings.empty());
  }
  EXPECT_FALSE(n.entries()[3].available());
  EXPECT_EQ(n.entries()[3].warnings.size(), 1u);
}

TEST(NormalizationTest, ModelStatesAreSeparateGroups) {
  ScoreTable t;
  auto add = [&](const char* method, const char* state, double v) {
    auto e = entry(MetricId::kSanity, method, "d", v);
    e.model_state = state;
    t.add(e);
  };
  add("a", "trained", 1.0);
  add("b", "trained", 3.0);
  add("a", "random", 100.0);
  add("b", "random", 300.0);
  const auto n = normalize_dataset_bias(t);
  EXPECT_NEAR(n.entries()[0].value, -1.0, 1e-12);
  EXPECT_NEAR(n.entries()[2].value, -1.0, 1e-12);
}

TEST(PearsonTest, MatchesTwoPassOracle) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 40);
    std::vector<double> x(n), y(n);
    const double rho = (trial % 7) / 3.0 - 1.0;
    const double offset = trial % 5 == 0 ? 1e3 : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = g(rng) + offset;
      y[k] = rho * x[k] + g(rng);
    }
    EXPECT_NEAR(pearson(x, y), naive_pearson(x, y), 1e-12) << trial;
  }
}

TEST(PearsonTest, EdgeCases) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {2, 4, 6, 8}, c = {5, 5, 5, 5};
  EXPECT_NEAR(pearson(a, b), 1.0, 1e-15);
  const std::vector<double> neg = {-1, -2, -3, -4};
  EXPECT_NEAR(pearson(a, neg), -1.0, 1e-15);
  EXPECT_TRUE(std::isnan(pearson(a, c)));
  EXPECT_TRUE(std::isnan(pearson(std::vector<double>{1, 2}, std::vector<double>{2, 1})));
  EXPECT_THROW(pearson(a, std::vector<double>{1, 2, 3}), InvariantError);
}

TEST(CorrelationTest, PairsObservationsAndMasksDegenerateMetrics) {
  ScoreTable t;
  const double s[] = {1, 2, 3, 4};
  const double f[] = {2, 1, 4, 3};
  const char* methods[] = {"a", "b", "c", "e"};
  for (int k = 0; k < 4; ++k) {
    t.add(entry(MetricId::kSanity, methods[k], "d", s[k]));
    t.add(entry(MetricId::kFaithfulnessTi, methods[k], "d", f[k]));
    t.add(entry(MetricId::kRobustness, methods[k], "d", 0.0));  // zero variance
  }
  t.add(entry(MetricId::kStability, "a", "d", 1.0));
  const auto cm = correlation_matrix(t, false);
  ASSERT_EQ(cm.metrics, (std::vector<MetricId>{MetricId::kSanity, MetricId::kFaithfulnessTi, MetricId::kRobustness,
                                               MetricId::kStability}));
  EXPECT_EQ(cm.r(0, 0), 1.0);
  EXPECT_NEAR(cm.r(0, 1), naive_pearson({1, 2, 3, 4}, {2, 1, 4, 3}), 1e-12);
  EXPECT_EQ(cm.r(0, 1), cm.r(1, 0));
  EXPECT_TRUE(cm.masked(0, 2));
  EXPECT_TRUE(cm.masked(0, 3));
  EXPECT_EQ(cm.count(0, 3), 1u);
  EXPECT_EQ(cm.count(0, 1), 4u);
  // Normalization is affine within a group, so it does not move r here.
  const auto normalized = correlation_matrix(t, true);
  EXPECT_NEAR(normalized.r(0, 1), cm.r(0, 1), 1e-12);
  const auto text = render_correlation(cm, ReportFormat::kCsv);
  EXPECT_NE(text.find("sanity,1,"), std::string::npos);
  EXPECT_NE(text.find("NA"), std::string::npos);
}

TEST(CsvTest, RoundTripsValuesExactly) {
  ScoreTable t;
  t.add(entry(MetricId::kSanity, "a,b", "d\"q", 0.1 + 0.2));
  t.add(entry(MetricId::kRobustness, "m", "d", -1e-300));
  t.add(missing(MetricId::kLocalization, "m", "d", "why"));
  const auto csv = render_csv(t);
  std::istringstream in(csv);
  const auto back = parse_csv(in);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back.entries()[0].method_id, "a,b");
  EXPECT_EQ(back.entries()[0].dataset, "d\"q");
  EXPECT_EQ(back.entries()[0].value, 0.1 + 0.2);
  EXPECT_EQ(back.entries()[1].value, -1e-300);
  EXPECT_FALSE(back.entries()[2].available());
  EXPECT_EQ(render_csv(back), csv);
}

TEST(CsvTest, RejectsMalformedInput) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_csv(in);
  };
  EXPECT_THROW(parse(""), ReportError);
  EXPECT_THROW(parse("a,b\n"), ReportError);
  EXPECT_THROW(parse(std::string(kCsvHeader) + "\nsanity,a,d,trained\n"), ReportError);
  EXPECT_THROW(parse(std::string(kCsvHeader) + "\nspeed,a,d,trained,1\n"), ReportError);
  EXPECT_THROW(parse(std::string(kCsvHeader) + "\nsanity,a,d,trained,1x\n"), ReportError);
  EXPECT_THROW(parse(std::string(kCsvHeader) + "\nsanity,a,d,trained,1\nsanity,a,d,trained,2\n"), InvariantError);
  EXPECT_EQ(parse(std::string(kCsvHeader) + "\r\n").size(), 0u);
}

TEST(JsonTest, RoundTripsEverything) {
  auto t = sample_table();
  t.mutable_entries()[1].per_sample.push_back(std::nan(""));
  const auto back = parse_json(render_json(t));
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& a = t.entries()[i];
    const auto& b = back.entries()[i];
    EXPECT_EQ(key_of(a), key_of(b));
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.config_digest, b.config_digest);
    EXPECT_EQ(a.warnings, b.warnings);
    EXPECT_EQ(a.diagnostics, b.diagnostics);
    ASSERT_EQ(a.per_sample.size(), b.per_sample.size());
    for (std::size_t k = 0; k < a.per_sample.size(); ++k)
      EXPECT_TRUE(a.per_sample[k] == b.per_sample[k] || (std::isnan(a.per_sample[k]) && std::isnan(b.per_sample[k])));
  }
  EXPECT_EQ(back.provenance(), t.provenance());
  EXPECT_EQ(render_json(back), render_json(t));
  EXPECT_EQ(parse_table(render_json(t)).size(), t.size());
  EXPECT_EQ(parse_table(render_csv(t)).size(), t.size());
}

TEST(JsonTest, RejectsMalformedInput) {
  EXPECT_THROW(parse_json("{"), ReportError);
  EXPECT_THROW(parse_json("{}"), ReportError);
  EXPECT_THROW(parse_json(R"({"entries":[{"metric":"sanity"}]})"), ReportError);
  EXPECT_THROW(parse_json(R"({"entries":[{"metric":"nope","method":"a","dataset":"d","model_state":"t","status":"ok","value":1,"config_digest":"x"}]})"),
               ReportError);
  EXPECT_EQ(parse_json(R"({"entries":[]})").size(), 0u);
}

TEST(RenderTest, EmptyTables) {
  const ScoreTable empty;
  EXPECT_EQ(render_csv(empty), std::string(kCsvHeader) + "\n");
  EXPECT_EQ(render_text_heatmap(empty), "(empty table)\n");
  EXPECT_EQ(parse_json(render_json(empty)).size(), 0u);
  EXPECT_NE(render_svg_heatmap(empty).find("</svg>"), std::string::npos);
  EXPECT_EQ(render_correlation(correlation_matrix(empty), ReportFormat::kText), "(empty table)\n");
}

TEST(RenderTest, FormatNames) {
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::kCsv);
  EXPECT_EQ(parse_report_format("text-heatmap"), ReportFormat::kText);
  EXPECT_EQ(parse_report_format("svg"), ReportFormat::kSvg);
  EXPECT_THROW(parse_report_format("pdf"), ConfigError);
}

TEST(GoldenTest, Csv) { expect_golden("table.csv", render_csv(sample_table())); }
TEST(GoldenTest, Json) { expect_golden("table.json", render_json(sample_table())); }
TEST(GoldenTest, TextHeatmap) { expect_golden("heatmap.txt", render_text_heatmap(sample_table())); }
TEST(GoldenTest, SvgHeatmap) { expect_golden("heatmap.svg", render_svg_heatmap(sample_table())); }
TEST(GoldenTest, CorrelationText) {
  expect_golden("correlation.txt", render_correlation(correlation_matrix(sample_table()), ReportFormat::kText));
}

}  // namespace
}  // namespace tsxai
