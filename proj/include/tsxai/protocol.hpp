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

// Wire encoding of oracle requests and responses: one JSON object per line,
// matrices as row-major flat arrays with explicit rows/cols. A `hello`
// record carrying the protocol version opens every conversation.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsxai/core.hpp"
#include "tsxai/oracle.hpp"

namespace tsxai::protocol {

using nlohmann::json;

enum class Kind {
  kHello,
  kDescribe,
  kPredict,
  kSaliency,
  kBeginCascade,
  kAdvanceCascade,
  kReset,
  kInvalid,  // response to an unparseable request
};

inline constexpr Kind kAllKinds[] = {Kind::kHello,          Kind::kDescribe,       Kind::kPredict,
                                     Kind::kSaliency,       Kind::kBeginCascade,   Kind::kAdvanceCascade,
                                     Kind::kReset,          Kind::kInvalid};

inline std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::kHello: return "hello";
    case Kind::kDescribe: return "describe";
    case Kind::kPredict: return "predict";
    case Kind::kSaliency: return "saliency";
    case Kind::kBeginCascade: return "begin_cascade";
    case Kind::kAdvanceCascade: return "advance_cascade";
    case Kind::kReset: return "reset";
    case Kind::kInvalid: return "invalid";
  }
  return "invalid";
}

inline Kind parse_kind(std::string_view s) {
  for (Kind k : kAllKinds)
    if (to_string(k) == s) return k;
  throw OracleError("unknown record kind '" + std::string(s) + "'");
}

struct Request {
  Kind kind = Kind::kDescribe;
  std::optional<int> protocol;  // hello
  std::optional<TimeSeriesSample> sample;
  std::optional<ClassLabel> target_class;
  std::optional<std::string> method_id;
  std::optional<std::uint64_t> seed;
  std::optional<CascadeSession> session;

  friend bool operator==(const Request&, const Request&) = default;
};

struct Response {
  Kind kind = Kind::kDescribe;
  std::optional<int> protocol;
  std::optional<OracleInfo> info;
  std::optional<std::vector<double>> softmax;
  std::optional<Matrix> dense_softmax;
  std::optional<SaliencyMap> saliency;
  std::optional<CascadeSession> session;
  std::string model_state_id;
  std::optional<std::string> error;

  bool has_payload() const {
    return protocol || info || softmax || dense_softmax || saliency || session;
  }

  friend bool operator==(const Response&, const Response&) = default;
};

inline json encode_matrix(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix decode_matrix(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& v : j.at("data")) {
    if (!v.is_number()) throw OracleError("matrix entry is not a finite number");
    data.push_back(v.get<double>());
  }
  return Matrix(rows, cols, std::move(data));
}

inline json encode_session(const CascadeSession& s) {
  return json{{"session_id", s.session_id}, {"layers_randomized", s.layers_randomized}, {"seed", s.seed}};
}

inline CascadeSession decode_session(const json& j) {
  return CascadeSession{j.at("session_id").get<std::string>(), j.at("layers_randomized").get<int>(),
                        j.at("seed").get<std::uint64_t>()};
}

inline json encode_info(const OracleInfo& i) {
  return json{{"num_classes", i.num_classes}, {"channels", i.channels}, {"length", i.length},
              {"layer_count", i.layer_count}, {"methods", i.methods},
              {"task_kind", std::string(tsxai::to_string(i.task_kind))}};
}

inline OracleInfo decode_info(const json& j) {
  OracleInfo i;
  i.num_classes = j.at("num_classes").get<int>();
  i.channels = j.at("channels").get<std::size_t>();
  i.length = j.at("length").get<std::size_t>();
  i.layer_count = j.at("layer_count").get<int>();
  i.methods = j.at("methods").get<std::vector<std::string>>();
  i.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
  return i;
}

inline std::string encode(const Request& r) {
  json j{{"kind", std::string(to_string(r.kind))}};
  if (r.protocol) j["protocol"] = *r.protocol;
  if (r.sample) {
    j["sample"] = {{"id", r.sample->id()}, {"values", encode_matrix(r.sample->values())}};
  }
  if (r.target_class) j["target_class"] = r.target_class->index;
  if (r.method_id) j["method_id"] = *r.method_id;
  if (r.seed) j["seed"] = *r.seed;
  if (r.session) j["session"] = encode_session(*r.session);
  return j.dump();
}

inline Request decode_request(std::string_view line) {
  try {
    const json j = json::parse(line);
    Request r;
    r.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("protocol")) r.protocol = j["protocol"].get<int>();
    if (j.contains("sample"))
      r.sample = TimeSeriesSample(decode_matrix(j["sample"].at("values")),
                                  j["sample"].at("id").get<std::string>());
    if (j.contains("target_class")) r.target_class = ClassLabel{j["target_class"].get<int>()};
    if (j.contains("method_id")) r.method_id = j["method_id"].get<std::string>();
    if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("session")) r.session = decode_session(j["session"]);

    switch (r.kind) {
      case Kind::kHello:
        if (!r.protocol) throw OracleError("hello needs a protocol version");
        break;
      case Kind::kPredict:
        if (!r.sample) throw OracleError("predict needs a sample");
        break;
      case Kind::kSaliency:
        if (!r.sample || !r.target_class || !r.method_id)
          throw OracleError("saliency needs sample, target_class and method_id");
        break;
      case Kind::kAdvanceCascade:
        if (!r.session) throw OracleError("advance_cascade needs a session");
        break;
      case Kind::kInvalid:
        throw OracleError("'invalid' is not a request kind");
      default:
        break;
    }
    return r;
  } catch (const json::exception& e) {
    throw OracleError(std::string("malformed request: ") + e.what());
  } catch (const InvariantError& e) {
    throw OracleError(std::string("invalid request: ") + e.what());
  }
}

inline std::string encode(const Response& r) {
  json j{{"kind", std::string(to_string(r.kind))}, {"model_state_id", r.model_state_id}};
  if (r.error) j["error"] = *r.error;
  if (r.protocol) j["protocol"] = *r.protocol;
  if (r.info) j["info"] = encode_info(*r.info);
  if (r.softmax) j["softmax"] = *r.softmax;
  if (r.dense_softmax) j["dense_softmax"] = encode_matrix(*r.dense_softmax);
  if (r.saliency)
    j["saliency"] = {{"relevance", encode_matrix(r.saliency->relevance)},
                     {"target_class", r.saliency->target_class.index},
                     {"method_id", r.saliency->method_id},
                     {"model_state_id", r.saliency->model_state_id}};
  if (r.session) j["session"] = encode_session(*r.session);
  return j.dump();
}

inline Response decode_response(std::string_view line) {
  try {
    const json j = json::parse(line);
    Response r;
    r.kind = parse_kind(j.at("kind").get<std::string>());
    r.model_state_id = j.value("model_state_id", "");
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    if (j.contains("protocol")) r.protocol = j["protocol"].get<int>();
    if (j.contains("info")) r.info = decode_info(j["info"]);
    if (j.contains("softmax")) {
      std::vector<double> p;
      for (const auto& v : j["softmax"]) {
        if (!v.is_number()) throw OracleError("softmax entry is not a finite number");
        p.push_back(v.get<double>());
      }
      r.softmax = std::move(p);
    }
    if (j.contains("dense_softmax")) r.dense_softmax = decode_matrix(j["dense_softmax"]);
    if (j.contains("saliency")) {
      const auto& s = j["saliency"];
      r.saliency = SaliencyMap{decode_matrix(s.at("relevance")), ClassLabel{s.at("target_class").get<int>()},
                               s.at("method_id").get<std::string>(),
                               s.at("model_state_id").get<std::string>()};
    }
    if (j.contains("session")) r.session = decode_session(j["session"]);
    if (r.error && r.has_payload()) throw OracleError("response carries both payload and error");
    return r;
  } catch (const json::exception& e) {
    throw OracleError(std::string("malformed response: ") + e.what());
  } catch (const InvariantError& e) {
    throw OracleError(std::string("invalid response: ") + e.what());
  }
}

inline Response error_response(Kind kind, std::string message, std::string state = {}) {
  Response r;
  r.kind = kind;
  r.error = std::move(message);
  r.model_state_id = std::move(state);
  return r;
}

/// Executes one request against `oracle`; never throws.
inline Response handle(Oracle& oracle, const Request& req) {
  Response r;
  r.kind = req.kind;
  try {
    switch (req.kind) {
      case Kind::kHello:
        if (*req.protocol != kProtocolVersion)
          return error_response(req.kind,
                                "unsupported protocol version " + std::to_string(*req.protocol) +
                                    " (supported: " + std::to_string(kProtocolVersion) + ")",
                                oracle.state_id());
        r.protocol = kProtocolVersion;
        break;
      case Kind::kDescribe:
        r.info = oracle.describe();
        break;
      case Kind::kPredict: {
        Prediction p = oracle.predict(*req.sample);
        r.softmax = std::move(p.softmax);
        r.dense_softmax = std::move(p.dense_softmax);
        break;
      }
      case Kind::kSaliency:
        r.saliency = oracle.saliency(*req.sample, *req.target_class, *req.method_id, req.seed.value_or(0));
        break;
      case Kind::kBeginCascade:
        r.session = oracle.begin_cascade(req.seed.value_or(0));
        break;
      case Kind::kAdvanceCascade:
        r.session = oracle.advance_cascade(*req.session);
        break;
      case Kind::kReset:
        oracle.reset();
        break;
      case Kind::kInvalid:
        return error_response(req.kind, "invalid request", oracle.state_id());
    }
    r.model_state_id = oracle.state_id();
  } catch (const std::exception& e) {
    std::string state;
    try {
      state = oracle.state_id();
    } catch (...) {
    }
    return error_response(req.kind, e.what(), std::move(state));
  }
  return r;
}

}  // namespace tsxai::protocol
