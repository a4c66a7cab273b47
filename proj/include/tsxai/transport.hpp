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

// Line transports (pipes to a child process, TCP sockets, stdio), the
// client-side RemoteOracle and the server loop.

#pragma once

#include <arpa/inet.h>
#include <csignal>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "tsxai/oracle.hpp"
#include "tsxai/protocol.hpp"

namespace tsxai {

class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(const std::string& line) = 0;
  /// The next line without its terminator; nullopt at end of stream.
  virtual std::optional<std::string> read_line() = 0;
};

/// Reads from one descriptor and writes to another (may be the same socket).
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool owns) : rfd_(read_fd), wfd_(write_fd), owns_(owns) {}
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;
  ~FdChannel() override { close_fds(); }

  void write_line(const std::string& line) override {
    std::string buf = line;
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = is_socket_ ? ::send(wfd_, buf.data() + off, buf.size() - off, MSG_NOSIGNAL)
                                   : ::write(wfd_, buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == ENOTSOCK) {
          is_socket_ = false;
          continue;
        }
        throw OracleError(std::string("write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> read_line() override {
    for (;;) {
      const auto nl = buffer_.find('\n', scan_);
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        scan_ = 0;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      scan_ = buffer_.size();
      char chunk[65536];
      const ssize_t n = ::read(rfd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw OracleError(std::string("read failed: ") + std::strerror(errno));
      }
      if (n == 0) {
        if (buffer_.empty()) return std::nullopt;
        std::string line = std::move(buffer_);
        buffer_.clear();
        scan_ = 0;
        return line;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void close_write() {
    if (owns_ && wfd_ >= 0 && wfd_ != rfd_) {
      ::close(wfd_);
      wfd_ = -1;
    }
  }

 private:
  void close_fds() {
    if (!owns_) return;
    if (rfd_ >= 0) ::close(rfd_);
    if (wfd_ >= 0 && wfd_ != rfd_) ::close(wfd_);
    rfd_ = wfd_ = -1;
  }

  int rfd_, wfd_;
  bool owns_;
  bool is_socket_ = true;
  std::string buffer_;
  std::size_t scan_ = 0;
};

/// A child process running `/bin/sh -c command`, spoken to over its stdio.
class ProcessChannel : public LineChannel {
 public:
  explicit ProcessChannel(const std::string& command) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
      throw OracleError("cannot create pipes for backend");
    pid_ = ::fork();
    if (pid_ < 0) throw OracleError("cannot fork backend process");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
    fd_ = std::make_unique<FdChannel>(from_child[0], to_child[1], true);
  }

  ~ProcessChannel() override {
    fd_->close_write();
    using namespace std::chrono_literals;
    for (int i = 0; i < 200; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(10ms);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

  void write_line(const std::string& line) override { fd_->write_line(line); }
  std::optional<std::string> read_line() override { return fd_->read_line(); }
  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  std::unique_ptr<FdChannel> fd_;
};

inline std::pair<std::string, std::string> split_host_port(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ConfigError("tcp address must be HOST:PORT, got '" + addr + "'");
  return {addr.substr(0, colon), addr.substr(colon + 1)};
}

inline std::unique_ptr<LineChannel> connect_tcp(const std::string& addr) {
  const auto [host, port] = split_host_port(addr);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res)
    throw OracleError("cannot resolve backend address '" + addr + "'");
  int fd = -1;
  for (addrinfo* p = res; p; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw OracleError("cannot connect to backend at '" + addr + "'");
  return std::make_unique<FdChannel>(fd, fd, true);
}

/// Client side of the wire protocol. Every response is checked at the
/// boundary before it reaches a metric.
class RemoteOracle final : public Oracle {
 public:
  explicit RemoteOracle(std::unique_ptr<LineChannel> channel, int protocol_version = kProtocolVersion)
      : channel_(std::move(channel)) {
    protocol::Request hello;
    hello.kind = protocol::Kind::kHello;
    hello.protocol = protocol_version;
    const auto r = call(hello);
    if (!r.protocol || *r.protocol != kProtocolVersion)
      throw OracleError("handshake failed: backend did not confirm protocol version");
    info_ = describe();
  }

  OracleInfo describe() override {
    protocol::Request req;
    req.kind = protocol::Kind::kDescribe;
    const auto r = call(req);
    if (!r.info) throw OracleError("describe response has no capabilities");
    return *r.info;
  }

  Prediction predict(const TimeSeriesSample& sample) override {
    protocol::Request req;
    req.kind = protocol::Kind::kPredict;
    req.sample = sample;
    auto r = call(req);
    if (!r.softmax) throw OracleError("predict response has no softmax");
    Prediction p{std::move(*r.softmax), std::move(r.dense_softmax), r.model_state_id};
    validate_prediction(p, info_);
    return p;
  }

  SaliencyMap saliency(const TimeSeriesSample& sample, ClassLabel target, const std::string& method,
                       std::uint64_t seed) override {
    protocol::Request req;
    req.kind = protocol::Kind::kSaliency;
    req.sample = sample;
    req.target_class = target;
    req.method_id = method;
    req.seed = seed;
    auto r = call(req);
    if (!r.saliency) throw OracleError("saliency response has no map");
    validate_saliency(*r.saliency, sample);
    return std::move(*r.saliency);
  }

  CascadeSession begin_cascade(std::uint64_t seed) override {
    protocol::Request req;
    req.kind = protocol::Kind::kBeginCascade;
    req.seed = seed;
    auto r = call(req);
    if (!r.session) throw OracleError("begin_cascade response has no session");
    return *r.session;
  }

  CascadeSession advance_cascade(const CascadeSession& session) override {
    protocol::Request req;
    req.kind = protocol::Kind::kAdvanceCascade;
    req.session = session;
    auto r = call(req);
    if (!r.session) throw OracleError("advance_cascade response has no session");
    return *r.session;
  }

  std::string reset() override {
    protocol::Request req;
    req.kind = protocol::Kind::kReset;
    return call(req).model_state_id;
  }

  std::string state_id() override { return last_state_; }

  const OracleInfo& cached_info() const { return info_; }

 private:
  protocol::Response call(const protocol::Request& req) {
    channel_->write_line(protocol::encode(req));
    const auto line = channel_->read_line();
    if (!line) throw OracleError("backend closed the connection");
    auto r = protocol::decode_response(*line);
    if (r.kind != req.kind)
      throw OracleError("response kind '" + std::string(protocol::to_string(r.kind)) +
                        "' does not match request '" + std::string(protocol::to_string(req.kind)) + "'");
    last_state_ = r.model_state_id;
    if (r.error) throw OracleError(std::string(protocol::to_string(req.kind)) + ": " + *r.error);
    return r;
  }

  std::unique_ptr<LineChannel> channel_;
  OracleInfo info_;
  std::string last_state_;
};

/// Answers requests until the peer closes the stream.
inline void serve_conversation(Oracle& oracle, LineChannel& channel) {
  while (auto line = channel.read_line()) {
    if (line->empty()) continue;
    protocol::Response resp;
    try {
      resp = protocol::handle(oracle, protocol::decode_request(*line));
    } catch (const std::exception& e) {
      resp = protocol::error_response(protocol::Kind::kInvalid, e.what(), oracle.state_id());
    }
    channel.write_line(protocol::encode(resp));
  }
}

/// Listening TCP socket on 127.0.0.1; port 0 picks an ephemeral port.
class TcpListener {
 public:
  explicit TcpListener(unsigned short port) {
    std::signal(SIGPIPE, SIG_IGN);
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw OracleError("cannot create socket");
    int yes = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    a.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a) != 0 || ::listen(fd_, 16) != 0) {
      ::close(fd_);
      throw OracleError("cannot listen on port " + std::to_string(port));
    }
    socklen_t len = sizeof a;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&a), &len);
    port_ = ntohs(a.sin_port);
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
  }

  unsigned short port() const { return port_; }

  /// Serves connections one after another, each with a fresh oracle; stops
  /// after `max_connections` when given.
  void serve(const OracleFactory& factory, std::optional<int> max_connections = std::nullopt) {
    for (int served = 0; !max_connections || served < *max_connections; ++served) {
      const int c = ::accept(fd_, nullptr, nullptr);
      if (c < 0) {
        if (errno == EINTR) continue;
        throw OracleError("accept failed");
      }
      FdChannel ch(c, c, true);
      auto oracle = factory();
      try {
        serve_conversation(*oracle, ch);
      } catch (const OracleError&) {
        // Peer vanished mid-conversation; keep serving others.
      }
    }
  }

 private:
  int fd_ = -1;
  unsigned short port_ = 0;
};

}  // namespace tsxai
