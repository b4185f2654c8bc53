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

#include "mixdecode/entropy.hpp"

#include <algorithm>
#include <cmath>

namespace mixdecode {

double normalized_entropy(std::span<const double> probs) {
  if (probs.size() < 2) {
    throw InvalidVocabularyError("normalized entropy needs |V| >= 2");
  }
  // All entries equal means exactly uniform; skip the rounding of the sum.
  if (std::all_of(probs.begin(), probs.end(), [&](double p) { return p == probs.front(); })) {
    return 1.0;
  }
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  const double normalized = h / std::log(static_cast<double>(probs.size()));
  return std::clamp(normalized, 0.0, 1.0);
}

double normalized_entropy(const NextTokenDistribution& dist) {
  return normalized_entropy(dist.probs());
}

}  // namespace mixdecode
