// Copyright 2026 The hllrt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CardinalityOracle backed by a Redis-compatible server: reset is DEL,
// insert is PFADD, estimate is PFCOUNT.

#pragma once

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hllrt/oracle.hpp"
#include "hllrt/resp.hpp"

namespace hllrt {

struct RedisEndpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 6379;
  std::string key = "hllrt";

  std::string to_string() const {
    return "redis://" + host + ":" + std::to_string(port) + "/" + key;
  }
};

// Parses redis://host[:port][/key].
inline RedisEndpoint parse_endpoint(std::string_view url) {
  constexpr std::string_view scheme = "redis://";
  if (url.substr(0, scheme.size()) != scheme) {
    throw std::invalid_argument("endpoint must start with redis://");
  }
  url.remove_prefix(scheme.size());
  RedisEndpoint ep;
  const auto slash = url.find('/');
  std::string_view hostport = url.substr(0, slash);
  if (slash != std::string_view::npos) {
    const auto key = url.substr(slash + 1);
    if (key.empty()) throw std::invalid_argument("empty key in endpoint");
    ep.key = std::string(key);
  }
  const auto colon = hostport.rfind(':');
  if (colon != std::string_view::npos) {
    const auto port_text = hostport.substr(colon + 1);
    unsigned port = 0;
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0 || port > 65535) {
      throw std::invalid_argument("invalid port '" + std::string(port_text) + "'");
    }
    ep.port = static_cast<std::uint16_t>(port);
    hostport = hostport.substr(0, colon);
  }
  if (hostport.empty()) throw std::invalid_argument("empty host in endpoint");
  ep.host = std::string(hostport);
  return ep;
}

// Owning TCP stream with buffered reads and a per-read deadline.
class TcpStream final : public resp::ByteSource {
 public:
  TcpStream(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout)
      : timeout_(timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
      throw resp::ConnectionError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
    int last_errno = 0;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) {
        last_errno = errno;
        continue;
      }
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        fd_ = fd;
        break;
      }
      last_errno = errno;
      ::close(fd);
    }
    if (fd_ < 0) {
      throw resp::ConnectionError("cannot connect to " + host + ":" + service + ": " +
                                  std::strerror(last_errno));
    }
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }

  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void write_all(std::string_view bytes) {
    while (!bytes.empty()) {
      const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw resp::ConnectionError(std::string("send failed: ") + std::strerror(errno));
      }
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  char get() override {
    if (pos_ == len_) fill();
    return buf_[pos_++];
  }

 private:
  void fill() {
    pollfd pfd{fd_, POLLIN, 0};
    for (;;) {
      const int rc = ::poll(&pfd, 1, static_cast<int>(timeout_.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) throw resp::ConnectionError(std::string("poll failed: ") + std::strerror(errno));
      if (rc == 0) throw resp::Timeout("no reply within " + std::to_string(timeout_.count()) + " ms");
      break;
    }
    const ssize_t n = ::recv(fd_, buf_, sizeof buf_, 0);
    if (n == 0) throw resp::ConnectionError("connection closed by peer");
    if (n < 0) throw resp::ConnectionError(std::string("recv failed: ") + std::strerror(errno));
    pos_ = 0;
    len_ = static_cast<std::size_t>(n);
  }

  int fd_ = -1;
  std::chrono::milliseconds timeout_;
  char buf_[16 * 1024];
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
};

struct RemoteOptions {
  // Pipeline PFADD+PFCOUNT pairs and bulk PFADDs instead of one round trip
  // per command.
  bool pipelined = true;
  // Keep PFADD's 0/1 reply away from callers: the black-box model only
  // admits estimate observations. Disabling this exposes last_pfadd_reply().
  bool strict_model = true;
  std::chrono::milliseconds timeout{5000};
  std::size_t batch_size = 1000;
};

class RemoteOracle final : public CardinalityOracle {
 public:
  explicit RemoteOracle(RedisEndpoint endpoint, RemoteOptions options = {})
      : endpoint_(std::move(endpoint)), options_(options) {
    connect();
  }

  void reset() override { expect_integer(execute({{"DEL", endpoint_.key}}).front(), "DEL"); }

  void insert(std::string_view element) override {
    record_pfadd(expect_integer(execute({pfadd(element)}).front(), "PFADD"));
  }

  std::uint64_t estimate() override { return to_estimate(execute({pfcount()}).front()); }

  std::uint64_t insert_and_estimate(std::string_view element) override {
    if (!options_.pipelined) return CardinalityOracle::insert_and_estimate(element);
    auto replies = execute({pfadd(element), pfcount()});
    record_pfadd(expect_integer(replies[0], "PFADD"));
    return to_estimate(replies[1]);
  }

  void insert_all(std::span<const std::string> elements) override {
    if (!options_.pipelined) {
      CardinalityOracle::insert_all(elements);
      return;
    }
    for (std::size_t at = 0; at < elements.size(); at += options_.batch_size) {
      const auto chunk = elements.subspan(at, std::min(options_.batch_size, elements.size() - at));
      std::vector<std::vector<std::string>> cmds;
      cmds.reserve(chunk.size());
      for (const auto& e : chunk) cmds.push_back(pfadd(e));
      for (const auto& r : execute(cmds)) record_pfadd(expect_integer(r, "PFADD"));
    }
  }

  bool ping() { return execute({{"PING"}}).front() == resp::simple("PONG"); }

  // PFADD's register-changed bit; only available outside the strict model.
  std::optional<bool> last_pfadd_reply() const {
    if (options_.strict_model) {
      throw std::logic_error("PFADD replies are hidden in strict black-box mode");
    }
    return last_pfadd_;
  }

  const RedisEndpoint& endpoint() const noexcept { return endpoint_; }
  std::uint64_t reconnects() const noexcept { return reconnects_; }

 private:
  using Command = std::vector<std::string>;

  void connect() {
    stream_ = std::make_unique<TcpStream>(endpoint_.host, endpoint_.port, options_.timeout);
  }

  Command pfadd(std::string_view element) const {
    return {"PFADD", endpoint_.key, std::string(element)};
  }
  Command pfcount() const { return {"PFCOUNT", endpoint_.key}; }

  // Sends the batch and reads one reply per command. On a transport failure
  // the connection is re-established once and the unacknowledged batch is
  // replayed; every command used here is idempotent, so replay is safe. A
  // second failure propagates.
  std::vector<resp::Value> execute(const std::vector<Command>& cmds) {
    std::string wire;
    for (const auto& c : cmds) wire += resp::encode_command(c);
    try {
      return roundtrip(wire, cmds.size());
    } catch (const resp::ConnectionError&) {
    } catch (const resp::Timeout&) {
    }
    ++reconnects_;
    connect();
    return roundtrip(wire, cmds.size());
  }

  std::vector<resp::Value> roundtrip(const std::string& wire, std::size_t replies) {
    stream_->write_all(wire);
    std::vector<resp::Value> out;
    out.reserve(replies);
    for (std::size_t i = 0; i < replies; ++i) out.push_back(resp::decode(*stream_));
    return out;
  }

  static std::int64_t expect_integer(const resp::Value& v, const char* cmd) {
    if (v.is<resp::Error>()) throw resp::ServerError(std::string(cmd) + ": " + v.as<resp::Error>().text);
    if (!v.is<std::int64_t>()) throw resp::ProtocolError(std::string(cmd) + " reply is not an integer");
    return v.as<std::int64_t>();
  }

  static std::uint64_t to_estimate(const resp::Value& v) {
    const auto n = expect_integer(v, "PFCOUNT");
    if (n < 0) throw resp::ProtocolError("negative PFCOUNT");
    return static_cast<std::uint64_t>(n);
  }

  void record_pfadd(std::int64_t reply) { last_pfadd_ = reply != 0; }

  RedisEndpoint endpoint_;
  RemoteOptions options_;
  std::unique_ptr<TcpStream> stream_;
  std::optional<bool> last_pfadd_;
  std::uint64_t reconnects_ = 0;
};

// Each oracle gets its own connection; all of them address the same key, so
// at most one may be live at a time (the attack uses them sequentially).
inline OracleFactory remote_factory(RedisEndpoint endpoint, RemoteOptions options = {}) {
  return [endpoint = std::move(endpoint), options] {
    return std::make_unique<RemoteOracle>(endpoint, options);
  };
}

}  // namespace hllrt
