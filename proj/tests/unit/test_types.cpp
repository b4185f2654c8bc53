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

#include <cmath>
#include <limits>
#include <vector>

#include "mixdecode/types.hpp"

using namespace mixdecode;

TEST_CASE("controller config enforces ordered thresholds") {
  CHECK_NOTHROW(ControllerConfig(0.8, 0.3, 1, 2));
  CHECK_THROWS_AS(ControllerConfig(0.3, 0.8, 1, 2), ConfigError);
  CHECK_THROWS_AS(ControllerConfig(0.5, 0.5, 1, 2), ConfigError);
  CHECK_THROWS_AS(ControllerConfig(std::nan(""), 0.3, 1, 2), ConfigError);
  CHECK_THROWS_AS(ControllerConfig(0.8, 0.3, 1, 2, 1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(ControllerConfig(0.8, 0.3, 1, 2, -0.1, 0.5), ConfigError);
}

TEST_CASE("adapter strength follows the mode") {
  const ControllerConfig cfg(0.8, 0.3, 1, 2, 0.25, 2.0);
  CHECK(cfg.alpha_for(Mode::thinking) == 0.25);
  CHECK(cfg.alpha_for(Mode::concise) == 2.0);
}

TEST_CASE("pure-mode presets") {
  const auto concise = ControllerConfig::pure_concise();
  CHECK(concise.tau_up() > 1.0);
  const auto thinking = ControllerConfig::pure_thinking(100);
  CHECK(thinking.tau_up() == 0.0);
  CHECK(thinking.tau_down() < 0.0);
  CHECK(thinking.fwd() >= 100);
}

TEST_CASE("mode names round trip") {
  for (Mode m : {Mode::concise, Mode::thinking}) CHECK(parse_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_mode("long"), ConfigError);
}

TEST_CASE("next-token distribution validation") {
  CHECK_NOTHROW(NextTokenDistribution({0.5, 0.5}));
  CHECK_THROWS(NextTokenDistribution({1.0}));
  CHECK_THROWS(NextTokenDistribution({0.5, 0.6}));
  CHECK_THROWS(NextTokenDistribution({1.5, -0.5}));
  CHECK_THROWS(NextTokenDistribution({std::nan(""), 1.0}));
  const auto d = NextTokenDistribution::from_logits(std::vector<double>{0.0, std::log(3.0)});
  CHECK(d.prob(1) == doctest::Approx(0.75));
  CHECK(d.vocab_size() == 2);
}

TEST_CASE("mode state window flag") {
  CHECK_FALSE(ModeState().in_window());
  CHECK(ModeState(Mode::thinking, 5).in_window());
}
