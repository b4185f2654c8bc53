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

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mixdecode/engine.hpp"

namespace mixdecode {

struct ConfigPoint {
  double tau_up = 0.0;
  double tau_down = 0.0;
  std::size_t back = 0;
  std::size_t fwd = 0;
  double alpha_low = 0.0;
  double alpha_high = 1.0;

  static ConfigPoint from(const ControllerConfig& cfg);
  friend bool operator==(const ConfigPoint&, const ConfigPoint&) = default;
};

struct SweepResult {
  ConfigPoint point;
  std::size_t episodes = 0;
  double mean_accuracy = 0.0;
  double mean_kept_tokens = 0.0;
  double mean_compute_tokens = 0.0;
  double mean_thinking_coverage = 0.0;
  double mean_overhead_ratio = 0.0;
  /// Half-width of the normal-approximation 95% interval, 1.96 * sqrt(p(1-p)/n).
  double accuracy_ci95 = 0.0;
};

/// Means over episodes run at one config point. Real-valued means are summed
/// in sorted order, so the result does not depend on episode order.
/// Throws ConfigError on empty input.
SweepResult aggregate(std::span<const EpisodeResult> results, const ConfigPoint& point);

struct ParetoRow {
  SweepResult result;
  bool pareto = false;
};

/// Rows sorted by mean kept tokens (stable). A row is flagged unless another
/// row has both strictly fewer kept tokens and strictly higher accuracy.
std::vector<ParetoRow> pareto_table(std::span<const SweepResult> sweep);

inline constexpr const char* kSummaryHeader =
    "tau_up,tau_down,B,F,alpha_low,alpha_high,episodes,accuracy,ci95,kept_tokens,compute_tokens,"
    "coverage,overhead_ratio,pareto";

void write_summary_csv(std::ostream& out, std::span<const ParetoRow> rows);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

}  // namespace mixdecode
