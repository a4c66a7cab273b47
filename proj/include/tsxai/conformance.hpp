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

// Protocol conformance suite run by `serve-check` against any backend.

#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tsxai/oracle.hpp"
#include "tsxai/protocol.hpp"
#include "tsxai/transport.hpp"

namespace tsxai {

/// Answers each written request in-process; lets wire-level checks run
/// against an in-memory oracle.
class LoopbackChannel : public LineChannel {
 public:
  explicit LoopbackChannel(std::unique_ptr<Oracle> oracle) : oracle_(std::move(oracle)) {}

  void write_line(const std::string& line) override {
    protocol::Response resp;
    try {
      resp = protocol::handle(*oracle_, protocol::decode_request(line));
    } catch (const std::exception& e) {
      resp = protocol::error_response(protocol::Kind::kInvalid, e.what(), oracle_->state_id());
    }
    pending_.push_back(protocol::encode(resp));
  }

  std::optional<std::string> read_line() override {
    if (pending_.empty()) return std::nullopt;
    std::string s = std::move(pending_.front());
    pending_.pop_front();
    return s;
  }

 private:
  std::unique_ptr<Oracle> oracle_;
  std::deque<std::string> pending_;
};

using ChannelFactory = std::function<std::unique_ptr<LineChannel>()>;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace conformance_detail {

inline std::string roundtrip(LineChannel& ch, const protocol::Request& req) {
  ch.write_line(protocol::encode(req));
  auto line = ch.read_line();
  if (!line) throw OracleError("backend closed the connection");
  return *line;
}

inline protocol::Request hello(int version) {
  protocol::Request r;
  r.kind = protocol::Kind::kHello;
  r.protocol = version;
  return r;
}

inline TimeSeriesSample probe_sample(const OracleInfo& info, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(info.channels, info.length);
  for (double& v : m.flat()) v = n(rng);
  return TimeSeriesSample(std::move(m), "probe-" + std::to_string(seed));
}

}  // namespace conformance_detail

/// Runs every conformance check; each check opens its own connection.
inline std::vector<CheckResult> serve_check(const ChannelFactory& connect) {
  using namespace conformance_detail;
  std::vector<CheckResult> results;
  auto run = [&](std::string name, const std::function<void()>& body) {
    CheckResult r{std::move(name), false, {}};
    try {
      body();
      r.passed = true;
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    results.push_back(std::move(r));
  };
  auto expect = [](bool cond, const std::string& what) {
    if (!cond) throw OracleError(what);
  };
  auto oracle = [&]() { return RemoteOracle(connect()); };

  run("handshake", [&] {
    auto ch = connect();
    const auto r = protocol::decode_response(roundtrip(*ch, hello(kProtocolVersion)));
    expect(!r.error && r.protocol == kProtocolVersion, "hello not acknowledged with version 1");
  });

  run("handshake.version_negotiation", [&] {
    auto ch = connect();
    const auto r = protocol::decode_response(roundtrip(*ch, hello(kProtocolVersion + 98)));
    expect(r.error.has_value(), "unknown protocol version was accepted");
    protocol::Request d;
    d.kind = protocol::Kind::kDescribe;
    const auto after = protocol::decode_response(roundtrip(*ch, d));
    expect(after.info.has_value(), "backend did not survive a version mismatch");
  });

  run("request.malformed", [&] {
    auto ch = connect();
    roundtrip(*ch, hello(kProtocolVersion));
    ch->write_line("{\"kind\":\"predict\"}");
    auto line = ch->read_line();
    expect(line.has_value(), "backend closed the connection on a malformed request");
    const auto r = protocol::decode_response(*line);
    expect(r.error.has_value(), "malformed request did not produce an error record");
  });

  OracleInfo info;
  run("describe.capabilities", [&] {
    auto o = oracle();
    info = o.describe();
    expect(info.num_classes >= 2, "fewer than 2 classes");
    expect(info.channels >= 1 && info.length >= 2, "invalid input shape");
    expect(info.layer_count >= 1, "layer_count < 1");
    expect(!info.methods.empty(), "no saliency methods");
  });
  if (info.num_classes < 2 || info.channels < 1 || info.length < 2) return results;

  run("describe.idempotent", [&] {
    auto ch = connect();
    roundtrip(*ch, hello(kProtocolVersion));
    protocol::Request d;
    d.kind = protocol::Kind::kDescribe;
    expect(roundtrip(*ch, d) == roundtrip(*ch, d), "two describe responses differ");
  });

  run("predict.softmax_sum", [&] {
    auto o = oracle();
    for (std::uint64_t s = 0; s < 100; ++s) o.predict(probe_sample(info, s));
  });

  run("predict.deterministic", [&] {
    auto o = oracle();
    const auto x = probe_sample(info, 7);
    expect(o.predict(x) == o.predict(x), "repeated predictions differ");
  });

  run("predict.shape_mismatch", [&] {
    auto o = oracle();
    OracleInfo wrong = info;
    wrong.length += 1;
    bool rejected = false;
    try {
      o.predict(probe_sample(wrong, 1));
    } catch (const OracleError&) {
      rejected = true;
    }
    expect(rejected, "sample with the wrong shape was accepted");
    o.predict(probe_sample(info, 1));
  });

  for (const auto& method : info.methods) {
    run("saliency." + method, [&] {
      auto o = oracle();
      const auto x = probe_sample(info, 3);
      for (int c = 0; c < info.num_classes; ++c) {
        const auto m = o.saliency(x, ClassLabel{c}, method, 11);
        expect(m.target_class.index == c, "saliency map stamped with the wrong class");
        expect(!m.model_state_id.empty(), "saliency map lacks a model_state_id");
      }
      expect(o.saliency(x, ClassLabel{0}, method, 11) == o.saliency(x, ClassLabel{0}, method, 11),
             "seeded saliency is not reproducible");
    });
  }

  run("saliency.unsupported_method", [&] {
    auto o = oracle();
    bool rejected = false;
    try {
      o.saliency(probe_sample(info, 3), ClassLabel{0}, "no-such-method", 0);
    } catch (const OracleError&) {
      rejected = true;
    }
    expect(rejected, "unsupported method was accepted");
    o.predict(probe_sample(info, 3));
  });

  run("cascade.states", [&] {
    auto o = oracle();
    const auto x = probe_sample(info, 5);
    const auto before = o.predict(x);
    auto s = o.begin_cascade(42);
    std::string prev = o.predict(x).model_state_id;
    for (int k = 1; k <= info.layer_count; ++k) {
      s = o.advance_cascade(s);
      expect(s.layers_randomized == k, "advance did not increment layers_randomized by 1");
      const auto p = o.predict(x);
      expect(p.model_state_id != prev, "model_state_id unchanged after advance");
      prev = p.model_state_id;
    }
    o.reset();
    const auto after = o.predict(x);
    expect(after == before, "reset did not restore the trained model");
  });

  run("cascade.bound", [&] {
    auto o = oracle();
    auto s = o.begin_cascade(1);
    for (int k = 0; k < info.layer_count; ++k) s = o.advance_cascade(s);
    bool rejected = false;
    try {
      o.advance_cascade(s);
    } catch (const OracleError&) {
      rejected = true;
    }
    expect(rejected, "advancing past layer_count was accepted");
  });

  run("cascade.after_reset", [&] {
    auto o = oracle();
    auto s = o.begin_cascade(1);
    o.reset();
    bool rejected = false;
    try {
      o.advance_cascade(s);
    } catch (const OracleError&) {
      rejected = true;
    }
    expect(rejected, "advancing a reset session was accepted");
  });

  run("cascade.seeded", [&] {
    const auto x = probe_sample(info, 9);
    auto full = [&](RemoteOracle& o) {
      auto s = o.begin_cascade(123);
      for (int k = 0; k < info.layer_count; ++k) s = o.advance_cascade(s);
      return o.predict(x);
    };
    auto a = oracle();
    auto b = oracle();
    expect(full(a) == full(b), "same seed produced different randomized predictions");
  });

  return results;
}

}  // namespace tsxai
