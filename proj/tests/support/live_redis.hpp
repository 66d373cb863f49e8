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

// Access to a real Redis-compatible server for integration tests.
//
// HLLRT_REDIS_URL=redis://host:port/key points at an existing server.
// Otherwise, if `redis-server` is on PATH, a throwaway instance is started
// on a free local port and stopped on destruction. Without either, tests
// that need it skip.

#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "hllrt/remote.hpp"

namespace hllrt::testing {

inline std::optional<std::filesystem::path> find_on_path(const std::string& exe) {
  const char* path = std::getenv("PATH");
  if (path == nullptr) return std::nullopt;
  std::string p(path);
  std::size_t start = 0;
  while (start <= p.size()) {
    const auto end = p.find(':', start);
    const std::filesystem::path candidate =
        std::filesystem::path(p.substr(start, end == std::string::npos ? std::string::npos : end - start)) / exe;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return std::nullopt;
}

inline std::uint16_t free_local_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

class LiveRedis {
 public:
  // Returns nullptr when no server can be reached or started.
  static std::unique_ptr<LiveRedis> acquire(const std::string& key) {
    if (const char* url = std::getenv("HLLRT_REDIS_URL"); url != nullptr && *url != '\0') {
      auto ep = parse_endpoint(url);
      ep.key = key;
      if (reachable(ep)) return std::unique_ptr<LiveRedis>(new LiveRedis(ep, -1));
      return nullptr;
    }
    const auto exe = find_on_path("redis-server");
    if (!exe) return nullptr;
    RedisEndpoint ep;
    ep.host = "127.0.0.1";
    ep.port = free_local_port();
    ep.key = key;
    const pid_t pid = ::fork();
    if (pid < 0) return nullptr;
    if (pid == 0) {
      if (const int devnull = ::open("/dev/null", O_WRONLY); devnull >= 0) {
        ::dup2(devnull, STDOUT_FILENO);
        ::dup2(devnull, STDERR_FILENO);
      }
      const std::string port = std::to_string(ep.port);
      ::execl(exe->c_str(), exe->c_str(), "--port", port.c_str(), "--bind", "127.0.0.1", "--save", "",
              "--appendonly", "no", "--daemonize", "no", "--loglevel", "warning", static_cast<char*>(nullptr));
      ::_exit(127);
    }
    std::unique_ptr<LiveRedis> server(new LiveRedis(ep, pid));
    for (int i = 0; i < 100; ++i) {
      if (reachable(ep)) return server;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    return nullptr;
  }

  ~LiveRedis() {
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  const RedisEndpoint& endpoint() const noexcept { return endpoint_; }
  std::string url() const { return endpoint_.to_string(); }

 private:
  LiveRedis(RedisEndpoint ep, pid_t pid) : endpoint_(std::move(ep)), pid_(pid) {}

  static bool reachable(const RedisEndpoint& ep) {
    try {
      RemoteOptions o;
      o.timeout = std::chrono::milliseconds(500);
      RemoteOracle probe(ep, o);
      return probe.ping();
    } catch (const std::exception&) {
      return false;
    }
  }

  RedisEndpoint endpoint_;
  pid_t pid_;
};

}  // namespace hllrt::testing
