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

#include <doctest.h>

#include <cstdio>
#include <deque>
#include <sstream>
#include <string>

#include "mixdecode/engine.hpp"
#include "mixdecode/remote_backend.hpp"
#include "mixdecode/stub_bridge.hpp"
#include "mixdecode/trace_io.hpp"

using namespace mixdecode;

namespace {

// Channel answering each line with the stub bridge, optionally tampering with
// the n-th reply.
class LoopbackChannel : public LineChannel {
 public:
  LoopbackChannel(std::shared_ptr<StubBridge> bridge, int tamper_at = -1, std::string tampered = {})
      : bridge_(std::move(bridge)), tamper_at_(tamper_at), tampered_(std::move(tampered)) {}

  void send_line(std::string_view line) override {
    std::string reply = bridge_->handle(line);
    if (count_++ == tamper_at_) reply = tampered_;
    replies_.push_back(std::move(reply));
  }
  std::string recv_line(std::chrono::milliseconds) override {
    if (replies_.empty()) throw std::runtime_error("timeout waiting for a reply");
    std::string r = std::move(replies_.front());
    replies_.pop_front();
    return r;
  }

 private:
  std::shared_ptr<StubBridge> bridge_;
  int tamper_at_;
  std::string tampered_;
  int count_ = 0;
  std::deque<std::string> replies_;
};

EngineConfig s1_config() {
  EngineConfig cfg{.controller = ControllerConfig(0.8, 0.3, 1, 2), .session_id = {}};
  cfg.seed = 7;
  return cfg;
}

std::string trace_text(const DecodeTrace& t) {
  std::ostringstream s;
  write_trace(s, t);
  return s.str();
}

std::string local_s1() {
  const ScriptedBackend b(scenario("S1"));
  return trace_text(decode(b.prompt(), b, s1_config()));
}

const std::vector<TokenId> kPrompt(8, toy_vocab::kPrompt);

}  // namespace

TEST_CASE("endpoint parsing") {
  const auto tcp = RemoteEndpoint::parse("tcp://127.0.0.1:9000");
  CHECK(tcp.kind == RemoteEndpoint::Kind::tcp);
  CHECK(tcp.host == "127.0.0.1");
  CHECK(tcp.port == 9000);
  const auto cmd = RemoteEndpoint::parse("python3 bridge.py --x");
  CHECK(cmd.kind == RemoteEndpoint::Kind::command);
  CHECK(cmd.command == "python3 bridge.py --x");
  CHECK_THROWS_AS(RemoteEndpoint::parse("tcp://host"), ConfigError);
  CHECK_THROWS_AS(RemoteEndpoint::parse("tcp://host:0"), ConfigError);
  CHECK_THROWS_AS(RemoteEndpoint::parse("tcp://host:70000"), ConfigError);
  CHECK_THROWS_AS(RemoteEndpoint::parse(""), ConfigError);
}

TEST_CASE("remote decode through the stub equals the in-process decode") {
  auto bridge = std::make_shared<StubBridge>(ScriptedBackend(scenario("S1")));
  const RemoteBackend remote([bridge] { return std::make_unique<LoopbackChannel>(bridge); }, "loopback",
                             std::chrono::seconds(1));
  CHECK(trace_text(decode(kPrompt, remote, s1_config())) == local_s1());
  CHECK(bridge->open_sessions() == 0);
}

TEST_CASE("remote decode over a child process") {
  const RemoteBackend remote(RemoteEndpoint::parse(std::string(MIXDECODE_STUB_BRIDGE_PATH) + " --scenario S1"));
  CHECK(remote.describe().find("remote:") == 0);
  CHECK(trace_text(decode(kPrompt, remote, s1_config())) == local_s1());
}

TEST_CASE("remote decode over TCP") {
  FILE* server = ::popen((std::string(MIXDECODE_STUB_BRIDGE_PATH) + " --scenario S1 --listen 0 --once").c_str(), "r");
  REQUIRE(server != nullptr);
  char buf[64] = {};
  REQUIRE(std::fgets(buf, sizeof buf, server) != nullptr);
  int port = 0;
  REQUIRE(std::sscanf(buf, "listening %d", &port) == 1);
  {
    const RemoteBackend remote(RemoteEndpoint::parse("tcp://127.0.0.1:" + std::to_string(port)));
    CHECK(trace_text(decode(kPrompt, remote, s1_config())) == local_s1());
  }
  CHECK(::pclose(server) == 0);
}

TEST_CASE("protocol failures poison the session and carry its id") {
  auto bridge = std::make_shared<StubBridge>(ScriptedBackend(scenario("S1")));
  // Reply #2 is the first step (after init and prefill).
  for (const std::string bad : {std::string("garbage"), std::string(R"({"ok":false,"code":"boom"})"),
                                std::string(R"({"ok":true,"token":999,"entropy":0.1,"logprob":0,"eos":false})")}) {
    auto channel = std::make_unique<LoopbackChannel>(bridge, 2, bad);
    RemoteSession session(std::move(channel), "sess-9", std::chrono::seconds(1));
    session.handshake(kPrompt, 1.0);
    try {
      session.step(1.0, 1.0, 0);
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.session() == "sess-9");
    }
    CHECK(session.poisoned());
    CHECK_THROWS_AS(session.step(1.0, 1.0, 0), BackendError);
  }
}

TEST_CASE("bad rollback and timeouts surface as backend errors") {
  auto bridge = std::make_shared<StubBridge>(ScriptedBackend(scenario("S1")));
  RemoteSession session(std::make_unique<LoopbackChannel>(bridge), "s", std::chrono::seconds(1));
  session.handshake(kPrompt, 1.0);
  CHECK(session.length() == 8);
  CHECK_THROWS_AS(session.rollback(12), BackendError);
  CHECK(session.poisoned());

  const RemoteBackend silent(RemoteEndpoint::parse("sleep 5"), std::chrono::milliseconds(200));
  CHECK_THROWS_AS(silent.open_session("t", kPrompt, 1.0), BackendError);
  const RemoteBackend missing(RemoteEndpoint::parse("exit 0"), std::chrono::milliseconds(500));
  CHECK_THROWS_AS(missing.open_session("u", kPrompt, 1.0), BackendError);
  const RemoteBackend refused(RemoteEndpoint::parse("tcp://127.0.0.1:1"));
  CHECK_THROWS_AS(refused.open_session("v", kPrompt, 1.0), BackendError);
}
