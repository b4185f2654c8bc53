/*
 * Copyright (c) 2026, The mixdecode Authors.  All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Protocol server over the scripted policy pair, for exercising the remote
// backend without a real model. Speaks on stdin/stdout, or on a TCP port with
// --listen (one thread per connection; sessions are shared).

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "mixdecode/stub_bridge.hpp"

namespace {

void serve_connection(int fd, mixdecode::StubBridge& bridge, std::mutex& mu) {
  std::string buffer;
  char chunk[4096];
  for (;;) {
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::string reply;
      {
        std::lock_guard lock(mu);
        reply = bridge.handle(line);
      }
      reply.push_back('\n');
      std::size_t off = 0;
      while (off < reply.size()) {
        const ssize_t w = ::send(fd, reply.data() + off, reply.size() - off, MSG_NOSIGNAL);
        if (w < 0 && errno == EINTR) continue;
        if (w <= 0) {
          ::close(fd);
          return;
        }
        off += static_cast<std::size_t>(w);
      }
    }
  }
  ::close(fd);
}

int listen_on(int port, bool once, mixdecode::StubBridge& bridge) {
  const int sock = ::socket(AF_INET, SOCK_STREAM, 0);
  if (sock < 0) {
    std::cerr << "socket: " << std::strerror(errno) << '\n';
    return 1;
  }
  const int yes = 1;
  ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(sock, 16) != 0) {
    std::cerr << "bind/listen: " << std::strerror(errno) << '\n';
    ::close(sock);
    return 1;
  }
  socklen_t len = sizeof addr;
  ::getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len);
  std::cout << "listening " << ntohs(addr.sin_port) << std::endl;

  std::mutex mu;
  for (;;) {
    const int fd = ::accept(sock, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (once) {
      serve_connection(fd, bridge, mu);
      break;
    }
    std::thread(serve_connection, fd, std::ref(bridge), std::ref(mu)).detach();
  }
  ::close(sock);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scripted-model server for the mixdecode wire protocol", "mixdecode-stub-bridge"};
  std::string scenario = "fork3";
  mixdecode::ScriptedBackend::Options opt;
  int port = -1;
  bool once = false;
  app.add_option("--scenario", scenario, "scripted scenario")->capture_default_str();
  app.add_option("--alpha-low", opt.alpha_low, "thinking-mode adapter strength")->capture_default_str();
  app.add_option("--alpha-high", opt.alpha_high, "concise-mode adapter strength")->capture_default_str();
  app.add_flag("--kv-invariant", opt.kv_invariant_adapter, "report a k/v-invariant adapter");
  app.add_option("--listen", port, "serve TCP on 127.0.0.1:PORT (0 picks a free port)")
      ->check(CLI::Range(0, 65535));
  app.add_flag("--once", once, "with --listen: exit after the first connection closes");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    opt.name = scenario;
    mixdecode::StubBridge bridge(
        mixdecode::ScriptedBackend(mixdecode::scenario(scenario), opt));
    if (port >= 0) return listen_on(port, once, bridge);
    std::ios::sync_with_stdio(false);
    bridge.serve(std::cin, std::cout);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
