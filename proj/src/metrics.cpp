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

#include "mixdecode/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace mixdecode {

namespace {

template <typename F>
double sorted_mean(std::span<const EpisodeResult> results, F field) {
  std::vector<double> values;
  values.reserve(results.size());
  for (const auto& r : results) values.push_back(static_cast<double>(field(r)));
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

ConfigPoint ConfigPoint::from(const ControllerConfig& cfg) {
  return {cfg.tau_up(), cfg.tau_down(), cfg.back(), cfg.fwd(), cfg.alpha_low(), cfg.alpha_high()};
}

SweepResult aggregate(std::span<const EpisodeResult> results, const ConfigPoint& point) {
  if (results.empty()) throw ConfigError("aggregate needs at least one episode");
  SweepResult s;
  s.point = point;
  s.episodes = results.size();
  const auto n = static_cast<double>(results.size());
  const auto correct = std::count_if(results.begin(), results.end(),
                                     [](const EpisodeResult& r) { return r.correct; });
  s.mean_accuracy = static_cast<double>(correct) / n;
  s.mean_kept_tokens = sorted_mean(results, [](const EpisodeResult& r) { return r.kept_tokens; });
  s.mean_compute_tokens =
      sorted_mean(results, [](const EpisodeResult& r) { return r.compute_tokens; });
  s.mean_thinking_coverage =
      sorted_mean(results, [](const EpisodeResult& r) { return r.thinking_coverage; });
  s.mean_overhead_ratio =
      sorted_mean(results, [](const EpisodeResult& r) { return r.overhead_ratio; });
  s.accuracy_ci95 = 1.96 * std::sqrt(s.mean_accuracy * (1.0 - s.mean_accuracy) / n);
  return s;
}

std::vector<ParetoRow> pareto_table(std::span<const SweepResult> sweep) {
  std::vector<ParetoRow> rows;
  rows.reserve(sweep.size());
  for (const auto& s : sweep) rows.push_back({s, true});
  std::stable_sort(rows.begin(), rows.end(), [](const ParetoRow& a, const ParetoRow& b) {
    return a.result.mean_kept_tokens < b.result.mean_kept_tokens;
  });
  // After sorting, only rows with strictly fewer tokens can dominate row i;
  // track the best accuracy among them.
  double best_acc = -1.0;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].result.mean_kept_tokens == rows[i].result.mean_kept_tokens) {
      rows[j].pareto = !(best_acc > rows[j].result.mean_accuracy);
      ++j;
    }
    for (std::size_t k = i; k < j; ++k) best_acc = std::max(best_acc, rows[k].result.mean_accuracy);
    i = j;
  }
  return rows;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_summary_csv(std::ostream& out, std::span<const ParetoRow> rows) {
  out << kSummaryHeader << '\n';
  for (const auto& row : rows) {
    const SweepResult& r = row.result;
    const ConfigPoint& p = r.point;
    out << format_number(p.tau_up) << ',' << format_number(p.tau_down) << ',' << p.back << ','
        << p.fwd << ',' << format_number(p.alpha_low) << ',' << format_number(p.alpha_high) << ','
        << r.episodes << ',' << format_number(r.mean_accuracy) << ','
        << format_number(r.accuracy_ci95) << ',' << format_number(r.mean_kept_tokens) << ','
        << format_number(r.mean_compute_tokens) << ',' << format_number(r.mean_thinking_coverage)
        << ',' << format_number(r.mean_overhead_ratio) << ',' << (row.pareto ? 1 : 0) << '\n';
  }
}

}  // namespace mixdecode
