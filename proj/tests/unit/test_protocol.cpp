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

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixdecode/protocol.hpp"
#include "mixdecode/stub_bridge.hpp"

using namespace mixdecode;
using namespace mixdecode::protocol;

namespace {

std::string code_of(const std::string& reply) {
  const auto j = nlohmann::json::parse(reply);
  CHECK(j.at("ok") == false);
  return j.at("code").get<std::string>();
}

}  // namespace

TEST_CASE("requests use the exact field names") {
  CHECK(init_request("s") == R"({"op":"init","session":"s","protocol":1})");
  const std::vector<TokenId> toks{1, 2};
  CHECK(prefill_request("s", 0.5, toks) == R"({"op":"prefill","session":"s","alpha":0.5,"tokens":[1,2]})");
  CHECK(step_request("s", 1.0, 0.7, 12345) ==
        R"({"op":"step","session":"s","alpha":1.0,"temperature":0.7,"seed_draw":12345})");
  CHECK(rollback_request("s", 9) == R"({"op":"rollback","session":"s","to_len":9})");
  CHECK(close_request("s") == R"({"op":"close","session":"s"})");
}

TEST_CASE("replies parse and validate") {
  const auto init = parse_init_reply(
      R"({"ok":true,"capabilities":{"emits_full_dist":false,"kv_invariant_adapter":true,"concurrent_sessions":true},"vocab_size":64,"extra":1})");
  CHECK(init.vocab_size == 64);
  CHECK(init.capabilities.kv_invariant_adapter);
  CHECK_FALSE(init.capabilities.emits_full_dist);
  CHECK(parse_prefill_reply(R"({"ok":true,"cached_len":8})") == 8);
  const auto st = parse_step_reply(R"({"ok":true,"token":3,"entropy":0.25,"logprob":-1.5,"eos":false})");
  CHECK(st.token == 3);
  CHECK(st.entropy == 0.25);
  CHECK_NOTHROW(parse_rollback_reply(R"({"ok":true})"));
}

TEST_CASE("bad replies raise protocol errors with codes") {
  try {
    parse_rollback_reply(R"({"ok":false,"code":"bad_rollback"})");
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == "bad_rollback");
  }
  CHECK_THROWS_AS(parse_step_reply("garbage"), ProtocolError);
  CHECK_THROWS_AS(parse_step_reply(R"({"ok":true,"token":-1,"entropy":0,"logprob":0,"eos":false})"),
                  ProtocolError);
  CHECK_THROWS_AS(parse_step_reply(R"({"ok":true,"token":1,"logprob":0,"eos":false})"), ProtocolError);
  CHECK_THROWS_AS(parse_init_reply(
                      R"({"ok":true,"protocol":2,"capabilities":{"emits_full_dist":false,"kv_invariant_adapter":true,"concurrent_sessions":true},"vocab_size":64})"),
                  ProtocolError);
  CHECK_THROWS_AS(parse_init_reply(R"({"ok":true,"vocab_size":64})"), ProtocolError);
}

TEST_CASE("stub bridge answers protocol violations with error codes") {
  StubBridge bridge(ScriptedBackend(scenario("S1")));
  CHECK(code_of(bridge.handle("not json")) == "bad_request");
  CHECK(code_of(bridge.handle(R"({"session":"a"})")) == "bad_request");
  CHECK(code_of(bridge.handle(R"({"op":"step","session":"a","alpha":1,"temperature":1,"seed_draw":0})")) ==
        "unknown_session");
  CHECK(code_of(bridge.handle(R"({"op":"init","session":"a","protocol":7})")) == "protocol_version");
  CHECK(code_of(bridge.handle(R"({"op":"fly","session":"a"})")) == "unknown_op");
  bridge.handle(init_request("a"));
  CHECK(code_of(bridge.handle(R"({"op":"step","session":"a","alpha":1,"temperature":1,"seed_draw":0})")) ==
        "bad_request");
  bridge.handle(prefill_request("a", 1.0, std::vector<TokenId>(8, 1)));
  CHECK(code_of(bridge.handle(rollback_request("a", 9))) == "bad_rollback");
  CHECK(code_of(bridge.handle(rollback_request("a", 7))) == "bad_rollback");
  CHECK(code_of(bridge.handle(R"({"op":"step","session":"a","alpha":1,"temperature":-1,"seed_draw":0})")) ==
        "bad_request");
  const auto step = nlohmann::json::parse(bridge.handle(step_request("a", 1.0, 1.0, 0)));
  CHECK(step.at("ok") == true);
  CHECK_NOTHROW(parse_rollback_reply(bridge.handle(rollback_request("a", 8))));
  CHECK(bridge.open_sessions() == 1);
  bridge.handle(close_request("a"));
  CHECK(bridge.open_sessions() == 0);
}

TEST_CASE("stub bridge reproduces the golden transcript byte for byte") {
  std::ifstream f(std::string(MIXDECODE_GOLDEN_DIR) + "/stub_transcript.txt");
  REQUIRE(f.good());
  StubBridge bridge(ScriptedBackend(scenario("S1")));
  std::string line, request;
  std::size_t pairs = 0;
  while (std::getline(f, line)) {
    if (line.rfind("> ", 0) == 0) {
      request = line.substr(2);
    } else if (line.rfind("< ", 0) == 0) {
      CHECK(bridge.handle(request) == line.substr(2));
      ++pairs;
    }
  }
  CHECK(pairs >= 10);
}
