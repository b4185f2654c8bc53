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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "mixdecode/metrics.hpp"
#include "oracles.hpp"

using namespace mixdecode;

namespace {

EpisodeResult episode(bool correct, std::size_t kept, std::size_t compute = 0,
                      double coverage = 0.0, double overhead = 0.0) {
  EpisodeResult r;
  r.correct = correct;
  r.kept_tokens = kept;
  r.compute_tokens = compute ? compute : kept;
  r.thinking_coverage = coverage;
  r.overhead_ratio = overhead;
  return r;
}

SweepResult point(double tokens, double accuracy) {
  SweepResult s;
  s.mean_kept_tokens = tokens;
  s.mean_accuracy = accuracy;
  return s;
}

}  // namespace

TEST_CASE("aggregate computes means") {
  const std::vector<EpisodeResult> rs{episode(true, 10), episode(false, 20)};
  const SweepResult s = aggregate(rs, ConfigPoint{});
  CHECK(s.episodes == 2);
  CHECK(s.mean_accuracy == 0.5);
  CHECK(s.mean_kept_tokens == 15.0);
  CHECK(s.accuracy_ci95 == doctest::Approx(1.96 * std::sqrt(0.25 / 2)));
}

TEST_CASE("all-correct batch has zero interval width") {
  const std::vector<EpisodeResult> rs(5, episode(true, 3));
  CHECK(aggregate(rs, ConfigPoint{}).accuracy_ci95 == 0.0);
}

TEST_CASE("empty batch is an error") {
  CHECK_THROWS_AS(aggregate(std::vector<EpisodeResult>{}, ConfigPoint{}), ConfigError);
}

TEST_CASE("aggregate is permutation invariant") {
  std::mt19937_64 rng(4);
  std::vector<EpisodeResult> rs;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const std::size_t kept = 5 + rng() % 50;
    rs.push_back(episode(u(rng) < 0.7, kept, kept + rng() % 7, u(rng), u(rng) * 0.1));
  }
  const SweepResult a = aggregate(rs, ConfigPoint{});
  for (int k = 0; k < 20; ++k) {
    std::shuffle(rs.begin(), rs.end(), rng);
    const SweepResult b = aggregate(rs, ConfigPoint{});
    CHECK(a.mean_accuracy == b.mean_accuracy);
    CHECK(a.mean_kept_tokens == b.mean_kept_tokens);
    CHECK(a.mean_compute_tokens == b.mean_compute_tokens);
    CHECK(a.mean_thinking_coverage == b.mean_thinking_coverage);
    CHECK(a.mean_overhead_ratio == b.mean_overhead_ratio);
  }
}

TEST_CASE("Bernoulli batch concentrates around its rate") {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin(0.857);
  std::vector<EpisodeResult> rs;
  for (int i = 0; i < 2000; ++i) rs.push_back(episode(coin(rng), 57));
  CHECK(std::abs(aggregate(rs, ConfigPoint{}).mean_accuracy - 0.857) <= 0.03);
}

TEST_CASE("pareto flags strict dominance") {
  const std::vector<SweepResult> two{point(20, 0.8), point(10, 0.9)};
  const auto rows = pareto_table(two);
  CHECK(rows[0].result.mean_kept_tokens == 10);
  CHECK(rows[0].pareto);
  CHECK_FALSE(rows[1].pareto);
  const std::vector<SweepResult> same{point(10, 0.9), point(10, 0.9)};
  for (const auto& r : pareto_table(same)) CHECK(r.pareto);
}

TEST_CASE("pareto flags match the brute-force oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    std::vector<SweepResult> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(point(double(rng() % 10), (rng() % 5) / 4.0));
    const auto rows = pareto_table(pts);
    std::vector<double> tok, acc;
    for (const auto& r : rows) {
      tok.push_back(r.result.mean_kept_tokens);
      acc.push_back(r.result.mean_accuracy);
    }
    CHECK(std::is_sorted(tok.begin(), tok.end()));
    const auto expected = oracle::pareto_flags(tok, acc);
    for (std::size_t i = 0; i < n; ++i) CHECK(rows[i].pareto == expected[i]);
  }
}

TEST_CASE("summary CSV has the fixed header") {
  SweepResult s = point(12, 0.5);
  s.point = ConfigPoint::from(ControllerConfig(0.8, 0.3, 1, 8));
  s.episodes = 4;
  std::ostringstream out;
  write_summary_csv(out, pareto_table(std::vector<SweepResult>{s}));
  const std::string text = out.str();
  CHECK(text.substr(0, text.find('\n')) ==
        "tau_up,tau_down,B,F,alpha_low,alpha_high,episodes,accuracy,ci95,kept_tokens,"
        "compute_tokens,coverage,overhead_ratio,pareto");
  CHECK(text.find("\n0.8,0.3,1,8,0,1,4,0.5,0,12,0,0,0,1\n") != std::string::npos);
}

TEST_CASE("numbers print in shortest round-trip form") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
