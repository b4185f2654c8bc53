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
#include <random>
#include <vector>

#include "mixdecode/entropy.hpp"
#include "oracles.hpp"

using namespace mixdecode;

TEST_CASE("uniform distribution has entropy exactly one") {
  for (std::size_t n : {2u, 3u, 7u, 64u, 1000u}) {
    const std::vector<double> p(n, 1.0 / static_cast<double>(n));
    CHECK(normalized_entropy(p) == 1.0);
  }
}

TEST_CASE("one-hot distribution has entropy exactly zero") {
  std::vector<double> p(10, 0.0);
  p[3] = 1.0;
  CHECK(normalized_entropy(p) == 0.0);
}

TEST_CASE("two-point distribution matches the binary entropy in bits") {
  const std::vector<double> p{0.25, 0.75};
  const double bits = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
  CHECK(normalized_entropy(p) == doctest::Approx(bits).epsilon(1e-14));
}

TEST_CASE("entropy matches direct summation on random distributions") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(2, 300);
  std::exponential_distribution<double> mass(1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> p(size(rng));
    double total = 0.0;
    for (auto& x : p) total += (x = mass(rng));
    for (auto& x : p) x /= total;
    CHECK(std::abs(normalized_entropy(p) - oracle::entropy(p)) <= 1e-12);
  }
}

TEST_CASE("zero-probability tokens contribute nothing") {
  const std::vector<double> with_zero{0.5, 0.5, 0.0, 0.0};
  CHECK(normalized_entropy(with_zero) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("vocabularies smaller than two are rejected") {
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(normalized_entropy(one), InvalidVocabularyError);
  CHECK_THROWS_AS(normalized_entropy(std::vector<double>{}), InvalidVocabularyError);
}

TEST_CASE("distribution overload agrees with the span overload") {
  const NextTokenDistribution d({0.1, 0.2, 0.3, 0.4});
  CHECK(normalized_entropy(d) == normalized_entropy(d.probs()));
}
