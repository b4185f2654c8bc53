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

#pragma once

#include <span>

#include "mixdecode/types.hpp"

namespace mixdecode {

/// Shannon entropy of the next-token distribution divided by log|V|, so the
/// result lies in [0, 1] for every vocabulary size. Natural log is used; the
/// normalisation cancels the base. Zero-probability entries contribute 0.
double normalized_entropy(const NextTokenDistribution& dist);

/// Same, over raw probabilities that the caller already validated.
/// Throws InvalidVocabularyError when fewer than two entries are given.
double normalized_entropy(std::span<const double> probs);

}  // namespace mixdecode
