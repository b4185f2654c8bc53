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

#include <cstdint>
#include <span>
#include <vector>

#include "mixdecode/types.hpp"

namespace mixdecode {

/// Draws travel as 53-bit integers so they survive JSON and map exactly onto
/// doubles in [0, 1).
constexpr std::uint64_t kDrawBits = 53;
constexpr std::uint64_t kDrawMask = (std::uint64_t{1} << kDrawBits) - 1;

double unit_from_draw(std::uint64_t draw) noexcept;

/// q(v) proportional to p(v)^(1/T), zeros stay zero. T must be > 0.
std::vector<double> apply_temperature(std::span<const double> probs, double temperature);

/// Inverse-CDF categorical sample. temperature == 0 selects the argmax with
/// the lowest index on ties; the draw is ignored in that case.
TokenId sample_token(std::span<const double> probs, double temperature, std::uint64_t draw);

}  // namespace mixdecode
