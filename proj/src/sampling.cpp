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

#include "mixdecode/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace mixdecode {

double unit_from_draw(std::uint64_t draw) noexcept {
  return static_cast<double>(draw & kDrawMask) * 0x1.0p-53;
}

std::vector<double> apply_temperature(std::span<const double> probs, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be positive and finite");
  }
  std::vector<double> out(probs.begin(), probs.end());
  if (temperature == 1.0) return out;
  const double pmax = *std::max_element(probs.begin(), probs.end());
  double z = 0.0;
  for (double& q : out) {
    q = q > 0.0 ? std::exp((std::log(q) - std::log(pmax)) / temperature) : 0.0;
    z += q;
  }
  for (double& q : out) q /= z;
  return out;
}

TokenId sample_token(std::span<const double> probs, double temperature, std::uint64_t draw) {
  if (probs.empty()) throw InvalidVocabularyError("cannot sample from an empty vocabulary");
  if (temperature < 0.0 || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be finite and non-negative");
  }
  if (temperature == 0.0) {
    return static_cast<TokenId>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  const std::vector<double> q = apply_temperature(probs, temperature);
  const double u = unit_from_draw(draw);
  double total = 0.0;
  for (double v : q) total += v;
  const double target = u * total;
  double cum = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    cum += q[i];
    last_nonzero = i;
    if (target < cum) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(last_nonzero);
}

}  // namespace mixdecode
