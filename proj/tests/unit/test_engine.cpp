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

#include <random>
#include <sstream>
#include <variant>
#include <vector>

#include "mixdecode/engine.hpp"
#include "mixdecode/replay_backend.hpp"
#include "mixdecode/trace_io.hpp"
#include "oracles.hpp"

using namespace mixdecode;

namespace {

EngineConfig config(ControllerConfig c, std::uint64_t seed = 7) {
  EngineConfig cfg{.controller = c, .session_id = {}};
  cfg.seed = seed;
  return cfg;
}

template <typename E>
std::vector<E> events_of(const DecodeTrace& t) {
  std::vector<E> out;
  for (const auto& e : t.events) {
    if (const auto* p = std::get_if<E>(&e.body)) out.push_back(*p);
  }
  return out;
}

std::string modes(const DecodeTrace& t) {
  std::string s;
  for (const auto& k : t.kept) s.push_back(k.mode == Mode::thinking ? 'T' : 'C');
  return s;
}

// Backend whose sessions report an entropy outside [0, 1].
class BrokenBackend : public ModelBackend {
 public:
  std::unique_ptr<BackendSession> open_session(const std::string&, std::span<const TokenId>,
                                               double) const override {
    return std::make_unique<Session>();
  }
  std::string describe() const override { return "broken"; }

 private:
  class Session : public BackendSession {
   public:
    const Capabilities& capabilities() const override { return caps_; }
    std::size_t vocab_size() const override { return 2; }
    std::size_t length() const override { return 1; }
    StepResult step(double, double, std::uint64_t) override {
      StepResult r;
      r.token = 1;
      r.entropy = 1.5;
      return r;
    }
    void rollback(std::size_t) override {}

   private:
    Capabilities caps_{false, false, true};
  };
};

}  // namespace

TEST_CASE("S1 scenario follows the hand simulation") {
  const ScriptedBackend b(scenario("S1"));
  const EpisodeResult r = run_episode(b, config(ControllerConfig(0.8, 0.3, 1, 2)));
  const DecodeTrace& t = r.trace;
  CHECK(t.trigger_count() == 1);
  CHECK(t.discarded.size() == 1);
  CHECK(t.discarded[0].pos == 2);
  CHECK(t.thinking_tokens() == 4);
  CHECK(modes(t) == "CCTTTT");
  CHECK(t.ended_by_eos());
  const auto trig = events_of<event::Trigger>(t);
  REQUIRE(trig.size() == 1);
  CHECK(trig[0].pos == 3);
  CHECK(trig[0].entropy >= 0.9);
  const auto open = events_of<event::WindowOpen>(t);
  REQUIRE(open.size() == 1);
  CHECK(open[0].left == 2);
  CHECK(open[0].right == 5);
  CHECK(events_of<event::Anneal>(t).size() == 1);
  CHECK(t.ledger.switches == 2);
  CHECK(t.ledger.total_prefill_tokens == 14);
  CHECK(r.compute_tokens == t.kept.size() + t.discarded.size());
  CHECK(t.probe_steps == 1);
  CHECK_FALSE(t.check_invariants().has_value());
}

TEST_CASE("unreachable trigger reproduces pure concise decoding") {
  const ScriptedBackend b(scenario("fork3"));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = run_episode(b, config(ControllerConfig(1.1, 0.3, 1, 8), seed));
    const auto c = run_episode(b, config(ControllerConfig::pure_concise(), seed));
    CHECK(a.trace.trigger_count() == 0);
    CHECK(a.kept_tokens == 12);
    std::vector<TokenId> ta, tc;
    for (const auto& k : a.trace.kept) ta.push_back(k.token);
    for (const auto& k : c.trace.kept) tc.push_back(k.token);
    CHECK(ta == tc);
  }
}

TEST_CASE("pure thinking decodes the whole task in thinking mode") {
  const ScriptedBackend b(scenario("fork3"));
  const auto r = run_episode(b, config(ControllerConfig::pure_thinking(10000), 3));
  CHECK(r.kept_tokens == 57);
  CHECK(r.thinking_coverage == 1.0);
  CHECK(r.trace.discarded.empty());
}

TEST_CASE("kept-token budget stops mid-window with a budget event") {
  const ScriptedBackend b(scenario("fork3"));
  EngineConfig cfg = config(ControllerConfig(0.8, 0.3, 1, 8));
  cfg.max_kept_tokens = 5;
  const auto t = decode(b.prompt(), b, cfg);
  CHECK(t.kept.size() == 5);
  CHECK_FALSE(t.ended_by_eos());
  const auto stop = events_of<event::BudgetStop>(t);
  REQUIRE(stop.size() == 1);
  CHECK(stop[0].kind == BudgetKind::kept);
  const auto closes = events_of<event::WindowClose>(t);
  REQUIRE(closes.size() == 1);
  CHECK(closes[0].reason == CloseReason::budget);
  CHECK_FALSE(t.check_invariants().has_value());
}

TEST_CASE("compute budget caps kept plus discarded tokens") {
  const ScriptedBackend b(scenario("fork3"));
  EngineConfig cfg = config(ControllerConfig(0.8, 0.3, 1, 8));
  cfg.max_kept_tokens = 10;
  cfg.max_compute_tokens = 10;
  const auto t = decode(b.prompt(), b, cfg);
  CHECK(t.compute_tokens == 10);
  CHECK(t.kept.size() + t.discarded.size() == 10);
  const auto stop = events_of<event::BudgetStop>(t);
  REQUIRE(stop.size() == 1);
  CHECK(stop[0].kind == BudgetKind::compute);
}

TEST_CASE("engine matches the reference simulation on replay traces") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> grid(0, 10);
  std::uniform_int_distribution<std::size_t> len(0, 40), win(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> h(len(rng));
    for (auto& x : h) x = grid(rng) / 10.0;
    const int up = grid(rng) + 1;
    const int down = std::uniform_int_distribution<int>(-1, up - 1)(rng);
    const ControllerConfig c(up / 10.0, down / 10.0, win(rng), win(rng));
    const ReplayBackend b(h);
    const auto t = decode(std::vector<TokenId>{1}, b, config(c));
    const auto sim = oracle::simulate(h, c.tau_up(), c.tau_down(), static_cast<long long>(c.back()),
                                      static_cast<long long>(c.fwd()));
    REQUIRE(t.kept.size() == h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      CHECK((t.kept[i].mode == Mode::thinking) == sim.kept_thinking[i]);
    }
    CHECK(t.trigger_count() == sim.triggers);
    CHECK(t.discarded.size() == sim.discarded);
    const auto journal = forward_journal(t);
    REQUIRE(journal.size() == sim.steps.size());
    for (std::size_t i = 0; i < journal.size(); ++i) {
      CHECK(static_cast<long long>(journal[i].pos) == sim.steps[i].pos);
      CHECK((journal[i].mode == Mode::thinking) == sim.steps[i].thinking);
    }
  }
}

TEST_CASE("rollback validation") {
  const ReplayBackend b(std::vector<double>(10, 0.1));
  DecodeSession s(std::vector<TokenId>{1}, b, config(ControllerConfig(0.8, 0.3, 1, 2)));
  for (int i = 0; i < 4; ++i) s.step();
  CHECK_THROWS_AS(s.rollback(5), LogicError);
  s.rollback(2);
  CHECK(s.kept_len() == 2);
  CHECK(s.trace().discarded.size() == 2);
  CHECK(s.backend_session().length() == 3);
  CHECK_THROWS_AS(s.finish(), LogicError);
}

TEST_CASE("invalid backend entropy surfaces as a backend error with the session id") {
  const BrokenBackend b;
  EngineConfig cfg = config(ControllerConfig(0.8, 0.3, 1, 2));
  cfg.session_id = "sess-42";
  try {
    decode(std::vector<TokenId>{1}, b, cfg);
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.session() == "sess-42");
  }
}

TEST_CASE("engine config validation") {
  EngineConfig cfg = config(ControllerConfig(0.8, 0.3, 1, 2));
  cfg.max_kept_tokens = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = config(ControllerConfig(0.8, 0.3, 1, 2));
  cfg.max_compute_tokens = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = config(ControllerConfig(0.8, 0.3, 1, 2));
  cfg.temperature = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const ReplayBackend b(std::vector<double>{0.1});
  CHECK_THROWS_AS(DecodeSession(std::vector<TokenId>{}, b, config(ControllerConfig(0.8, 0.3, 1, 2))),
                  ConfigError);
}

TEST_CASE("same seed gives the same trace") {
  const ScriptedBackend b(scenario("fork3"));
  const auto cfg = config(ControllerConfig(0.7, 0.3, 2, 5), 99);
  std::ostringstream a, c;
  write_trace(a, decode(b.prompt(), b, cfg));
  write_trace(c, decode(b.prompt(), b, cfg));
  CHECK(a.str() == c.str());
}

TEST_CASE("shared cache yields zero prefill") {
  ScriptedBackend::Options opt;
  opt.kv_invariant_adapter = true;
  const ScriptedBackend b(scenario("S1"), opt);
  const auto r = run_episode(b, config(ControllerConfig(0.8, 0.3, 1, 2)));
  CHECK(r.trace.ledger.switches == 2);
  CHECK(r.trace.ledger.total_prefill_tokens == 0);
  CHECK(r.overhead_ratio == 0.0);
}
