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

#include "tsxai/transport.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "tsxai/conformance.hpp"
#include "tsxai/metrics.hpp"
#include "tsxai/reference/model.hpp"
#include "tsxai/reference/oracle.hpp"

namespace tsxai {
namespace {

std::string mock(const std::string& defect = "none") {
  return std::string(TSXAI_MOCK_BACKEND_PATH) + " " + defect;
}

OracleFactory reference_oracles() {
  reference::ConvNetConfig cfg;
  cfg.length = 16;
  cfg.seed = 11;
  return reference::reference_factory(std::make_shared<reference::ConvNet>(cfg), reference::SaliencyConfig{});
}

const CheckResult* find_check(const std::vector<CheckResult>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return &r;
  return nullptr;
}

TEST(LoopbackTest, RemoteMatchesDirect) {
  auto factory = reference_oracles();
  auto direct = factory();
  RemoteOracle remote(std::make_unique<LoopbackChannel>(factory()));
  EXPECT_EQ(remote.cached_info().length, 16u);
  const TimeSeriesSample x(Matrix(1, 16, 0.25), "x");
  EXPECT_EQ(remote.predict(x).softmax, direct->predict(x).softmax);
  for (const char* m : {"gradient", "smoothgrad", "integrated_gradients", "occlusion", "random"})
    EXPECT_EQ(remote.saliency(x, ClassLabel{1}, m, 3).relevance, direct->saliency(x, ClassLabel{1}, m, 3).relevance)
        << m;
  auto s = remote.begin_cascade(9);
  s = remote.advance_cascade(s);
  EXPECT_EQ(remote.state_id(), "cascade-9-1");
  EXPECT_EQ(remote.reset(), "trained");
}

TEST(ProcessChannelTest, ConversesWithChildProcess) {
  RemoteOracle remote(std::make_unique<ProcessChannel>(mock()));
  const auto info = remote.describe();
  EXPECT_EQ(info.channels, 1u);
  EXPECT_EQ(info.length, 16u);
  EXPECT_EQ(info.layer_count, 3);
  const TimeSeriesSample x(Matrix(1, 16, -0.5), "x");
  const auto direct = reference_oracles()();
  EXPECT_EQ(remote.predict(x).softmax, direct->predict(x).softmax);
  EXPECT_EQ(remote.saliency(x, ClassLabel{0}, "gradient", 0).relevance,
            direct->saliency(x, ClassLabel{0}, "gradient", 0).relevance);
}

TEST(ProcessChannelTest, BoundaryValidatorRejectsDefects) {
  const TimeSeriesSample x(Matrix(1, 16), "x");
  RemoteOracle bad_sum(std::make_unique<ProcessChannel>(mock("softmax_sum")));
  EXPECT_THROW(bad_sum.predict(x), OracleError);
  RemoteOracle bad_shape(std::make_unique<ProcessChannel>(mock("saliency_shape")));
  EXPECT_THROW(bad_shape.saliency(x, ClassLabel{0}, "gradient", 0), OracleError);
}

TEST(ProcessChannelTest, HandshakeFailureIsReported) {
  EXPECT_THROW(RemoteOracle(std::make_unique<ProcessChannel>("exit 0")), OracleError);
  EXPECT_THROW(RemoteOracle(std::make_unique<ProcessChannel>("echo '{\"kind\":\"hello\"}'")), OracleError);
  EXPECT_THROW(RemoteOracle(std::make_unique<ProcessChannel>(mock()), 2), OracleError);
}

TEST(TcpTest, ServesSequentialConnections) {
  TcpListener listener(0);
  const auto port = listener.port();
  std::thread server([&] { listener.serve(reference_oracles(), 2); });
  const TimeSeriesSample x(Matrix(1, 16, 1.0), "x");
  std::vector<double> first;
  {
    RemoteOracle a(connect_tcp("127.0.0.1:" + std::to_string(port)));
    first = a.predict(x).softmax;
  }
  {
    RemoteOracle b(connect_tcp("127.0.0.1:" + std::to_string(port)));
    EXPECT_EQ(b.predict(x).softmax, first);
  }
  server.join();
  EXPECT_THROW(split_host_port("localhost"), ConfigError);
}

TEST(ServeCheckTest, ReferenceLoopbackPassesEverything) {
  auto factory = reference_oracles();
  const auto results = serve_check([&] { return std::make_unique<LoopbackChannel>(factory()); });
  EXPECT_GE(results.size(), 18u);
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  EXPECT_NE(find_check(results, "saliency.occlusion"), nullptr);
}

TEST(ServeCheckTest, MockProcessPassesEverything) {
  const auto results = serve_check([] { return std::make_unique<ProcessChannel>(mock()); });
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(ServeCheckTest, NamesTheBrokenInvariant) {
  const auto results = serve_check([] { return std::make_unique<ProcessChannel>(mock("softmax_sum")); });
  const auto* sum = find_check(results, "predict.softmax_sum");
  ASSERT_NE(sum, nullptr);
  EXPECT_FALSE(sum->passed);
  EXPECT_NE(sum->detail.find("softmax sums to"), std::string::npos);
  EXPECT_TRUE(find_check(results, "handshake")->passed);

  const auto stuck = serve_check([] { return std::make_unique<ProcessChannel>(mock("ignore_session")); });
  EXPECT_FALSE(find_check(stuck, "cascade.states")->passed);
  EXPECT_TRUE(find_check(stuck, "predict.softmax_sum")->passed);
}

TEST(FaultTest, BackendDeathMidCascadeMarksSamplesUnavailable) {
  // Each worker's backend dies on its second advance; sanity must report
  // failure for those samples rather than crash or score zero.
  const auto data = [] {
    std::vector<TimeSeriesSample> s;
    std::vector<ClassLabel> l;
    for (int i = 0; i < 4; ++i) {
      s.emplace_back(Matrix(1, 16, 0.1 * i), "s" + std::to_string(i));
      l.push_back(ClassLabel{i % 2});
    }
    return Dataset::classification("tiny", s, l, 2);
  }();
  OraclePool dying([] { return std::make_unique<RemoteOracle>(std::make_unique<ProcessChannel>(mock("die_on_advance 2"))); }, 2);
  const auto s = sanity("gradient", dying, data);
  EXPECT_FALSE(s.available());
  ASSERT_FALSE(s.warnings.empty());
  EXPECT_NE(s.warnings.back().find("closed the connection"), std::string::npos);

  OraclePool healthy([] { return std::make_unique<RemoteOracle>(std::make_unique<ProcessChannel>(mock())); }, 2);
  const auto ok = sanity("gradient", healthy, data);
  EXPECT_TRUE(ok.available());
  EXPECT_EQ(ok.per_sample.size(), 4u);
}

TEST(FaultTest, PartialFailureKeepsHealthyChunks) {
  const auto data = [] {
    std::vector<TimeSeriesSample> s;
    std::vector<ClassLabel> l;
    for (int i = 0; i < 4; ++i) {
      s.emplace_back(Matrix(1, 16, 0.1 * i), "s" + std::to_string(i));
      l.push_back(ClassLabel{i % 2});
    }
    return Dataset::classification("tiny", s, l, 2);
  }();
  int made = 0;
  OraclePool mixed(
      [&]() -> std::unique_ptr<Oracle> {
        return std::make_unique<RemoteOracle>(
            std::make_unique<ProcessChannel>(mock(made++ == 0 ? "die_on_advance 2" : "none")));
      },
      2);
  const auto s = sanity("gradient", mixed, data);
  ASSERT_TRUE(s.available());
  EXPECT_TRUE(std::isnan(s.per_sample[0]));
  EXPECT_TRUE(std::isnan(s.per_sample[1]));
  EXPECT_TRUE(std::isfinite(s.per_sample[2]));
  EXPECT_TRUE(std::isfinite(s.per_sample[3]));
  EXPECT_DOUBLE_EQ(s.value, 0.5 * (s.per_sample[2] + s.per_sample[3]));
  EXPECT_FALSE(s.warnings.empty());
}

}  // namespace
}  // namespace tsxai
