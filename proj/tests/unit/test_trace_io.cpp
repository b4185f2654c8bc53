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
#include <sstream>
#include <string>

#include "mixdecode/engine.hpp"
#include "mixdecode/trace_io.hpp"

using namespace mixdecode;

namespace {

DecodeTrace s1_trace() {
  const ScriptedBackend b(scenario("S1"));
  EngineConfig cfg{.controller = ControllerConfig(0.8, 0.3, 1, 2), .session_id = {}};
  cfg.seed = 7;
  return decode(b.prompt(), b, cfg);
}

std::string text_of(const DecodeTrace& t) {
  std::ostringstream s;
  write_trace(s, t);
  return s.str();
}

}  // namespace

TEST_CASE("trace round trips through text") {
  const DecodeTrace t = s1_trace();
  const std::string text = text_of(t);
  std::istringstream in(text);
  const DecodeTrace back = read_trace(in);
  CHECK(text_of(back) == text);
  CHECK(back.kept.size() == t.kept.size());
  CHECK(back.events.size() == t.events.size());
  CHECK(back.ledger.total_prefill_tokens == t.ledger.total_prefill_tokens);
  CHECK(back.compute_tokens == t.compute_tokens);
  CHECK(back.probe_steps == t.probe_steps);
}

TEST_CASE("S1 trace matches the recorded golden file") {
  std::ifstream f(std::string(MIXDECODE_GOLDEN_DIR) + "/run_S1_seed7.jsonl");
  REQUIRE(f.good());
  const std::string golden((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(text_of(s1_trace()) == golden);
}

TEST_CASE("header detection") {
  CHECK(looks_like_trace(text_of(s1_trace())));
  CHECK_FALSE(looks_like_trace("0.1\n0.2\n"));
  CHECK_FALSE(looks_like_trace(""));
}

TEST_CASE("malformed traces are rejected") {
  for (const char* bad : {"", "not json\n", "{\"trace\":\"other\",\"version\":1}\n",
                          "{\"trace\":\"mixdecode\",\"version\":99,\"prompt_len\":1,\"vocab_size\":2}\n",
                          "{\"trace\":\"mixdecode\",\"version\":1,\"prompt_len\":1,\"vocab_size\":2}\n"
                          "{\"event\":\"warp\",\"seq\":0}\n"}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(read_trace(in), ConfigError);
  }
}

TEST_CASE("forward journal lists every pass in order") {
  const DecodeTrace t = s1_trace();
  const auto j = forward_journal(t);
  CHECK(j.size() == t.kept.size() + t.discarded.size() + t.probe_steps + 1);
  for (std::size_t i = 1; i < j.size(); ++i) CHECK(j[i - 1].seq < j[i].seq);
  CHECK(j.front().pos == 0);
  CHECK(j[3].kind == ForwardStep::Kind::probe);
  CHECK(j[3].pos == 3);
  CHECK(j.back().kind == ForwardStep::Kind::eos);
}
