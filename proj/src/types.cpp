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

#include "mixdecode/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mixdecode {

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::thinking ? "thinking" : "concise";
}

Mode parse_mode(std::string_view text) {
  if (text == "thinking") return Mode::thinking;
  if (text == "concise") return Mode::concise;
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

std::string_view to_string(CloseReason reason) noexcept {
  switch (reason) {
    case CloseReason::end: return "end";
    case CloseReason::eos: return "eos";
    case CloseReason::budget: return "budget";
  }
  return "end";
}

std::string_view to_string(BudgetKind kind) noexcept {
  return kind == BudgetKind::kept ? "kept" : "compute";
}

NextTokenDistribution::NextTokenDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw InvalidVocabularyError("vocabulary size must be at least 2, got " +
                                 std::to_string(probs_.size()));
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ConfigError("probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << sum << ", expected 1 within " << kSumTolerance;
    throw ConfigError(msg.str());
  }
}

NextTokenDistribution NextTokenDistribution::from_logits(std::span<const double> logits) {
  if (logits.size() < 2) {
    throw InvalidVocabularyError("vocabulary size must be at least 2");
  }
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(max_logit)) {
    throw ConfigError("logits must contain a finite maximum");
  }
  std::vector<double> probs(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    z += probs[i];
  }
  for (double& p : probs) p /= z;
  return NextTokenDistribution(std::move(probs));
}

ControllerConfig::ControllerConfig(double tau_up, double tau_down, std::size_t back,
                                   std::size_t fwd, double alpha_low, double alpha_high)
    : tau_up_(tau_up),
      tau_down_(tau_down),
      back_(back),
      fwd_(fwd),
      alpha_low_(alpha_low),
      alpha_high_(alpha_high) {
  if (!std::isfinite(tau_up) || !std::isfinite(tau_down)) {
    throw ConfigError("thresholds must be finite");
  }
  if (!(tau_down < tau_up)) {
    throw ConfigError("hysteresis requires tau_down < tau_up");
  }
  if (!std::isfinite(alpha_low) || !std::isfinite(alpha_high) || alpha_low < 0.0) {
    throw ConfigError("adapter strengths must be finite and non-negative");
  }
  if (!(alpha_low < alpha_high)) {
    throw ConfigError("thinking strength alpha_low must be below concise strength alpha_high");
  }
}

ControllerConfig ControllerConfig::pure_concise(double alpha_low, double alpha_high) {
  return ControllerConfig(1.1, 0.3, 0, 0, alpha_low, alpha_high);
}

ControllerConfig ControllerConfig::pure_thinking(std::size_t max_len, double alpha_low,
                                                 double alpha_high) {
  return ControllerConfig(0.0, -1.0, 0, max_len, alpha_low, alpha_high);
}

ModeState::ModeState(Mode mode, std::optional<std::size_t> window_end)
    : mode_(mode), window_end_(window_end) {
  if (window_end_ && mode_ != Mode::thinking) {
    throw LogicError("an active window requires thinking mode");
  }
}

std::size_t DecodeTrace::thinking_tokens() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      kept.begin(), kept.end(), [](const KeptToken& k) { return k.mode == Mode::thinking; }));
}

double DecodeTrace::thinking_coverage() const noexcept {
  if (kept.empty()) return 0.0;
  return static_cast<double>(thinking_tokens()) / static_cast<double>(kept.size());
}

std::size_t DecodeTrace::trigger_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const TraceEvent& e) {
    return std::holds_alternative<event::Trigger>(e.body);
  }));
}

bool DecodeTrace::ended_by_eos() const noexcept {
  return !events.empty() && std::holds_alternative<event::Eos>(events.back().body);
}

std::optional<std::string> DecodeTrace::check_invariants() const {
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i].pos != i) {
      return "kept position " + std::to_string(kept[i].pos) + " at index " + std::to_string(i);
    }
    if (!(kept[i].entropy >= 0.0 && kept[i].entropy <= 1.0)) {
      return "kept entropy out of [0,1] at position " + std::to_string(i);
    }
  }
  int open = 0;
  std::size_t terminal = 0;
  for (const auto& e : events) {
    if (std::holds_alternative<event::WindowOpen>(e.body)) {
      if (open != 0) return "nested window_open";
      ++open;
    } else if (std::holds_alternative<event::WindowExtend>(e.body)) {
      open = 1;  // extends the open window or reopens one
    } else if (std::holds_alternative<event::WindowClose>(e.body)) {
      if (open != 1) return "window_close without window_open";
      --open;
    } else if (std::holds_alternative<event::Eos>(e.body) ||
               std::holds_alternative<event::BudgetStop>(e.body)) {
      ++terminal;
    }
  }
  if (open != 0) return "window left open";
  if (terminal != 1) return "expected exactly one terminating event";
  if (events.empty() || !(std::holds_alternative<event::Eos>(events.back().body) ||
                          std::holds_alternative<event::BudgetStop>(events.back().body))) {
    return "trace does not end with eos or budget_stop";
  }
  return std::nullopt;
}

}  // namespace mixdecode
