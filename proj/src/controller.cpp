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

#include "mixdecode/controller.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace mixdecode {

namespace {

std::size_t saturating_add(std::size_t a, std::size_t b) {
  return b > std::numeric_limits<std::size_t>::max() - a ? std::numeric_limits<std::size_t>::max()
                                                          : a + b;
}

}  // namespace

bool CoverageMap::contains(std::size_t pos) const noexcept {
  auto it = std::upper_bound(spans_.begin(), spans_.end(), pos,
                             [](std::size_t p, const Interval& s) { return p < s.left; });
  if (it == spans_.begin()) return false;
  return pos <= std::prev(it)->right;
}

void CoverageMap::mark(std::size_t left, std::size_t right) {
  if (left > right) {
    throw LogicError("coverage interval has left > right");
  }
  auto it = std::lower_bound(spans_.begin(), spans_.end(), left,
                             [](const Interval& s, std::size_t l) { return s.left < l; });
  if (it != spans_.end() && it->left <= right) {
    throw LogicError("window [" + std::to_string(left) + ", " + std::to_string(right) +
                     "] overlaps covered positions");
  }
  if (it != spans_.begin() && std::prev(it)->right >= left) {
    throw LogicError("window [" + std::to_string(left) + ", " + std::to_string(right) +
                     "] overlaps covered positions");
  }
  spans_.insert(it, Interval{left, right});
}

std::size_t CoverageMap::covered_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : spans_) n += s.right - s.left + 1;
  return n;
}

CoverageMap mark_covered(CoverageMap cov, std::size_t left, std::size_t right) {
  cov.mark(left, right);
  return cov;
}

Window open_window(std::size_t trigger_pos, const ControllerConfig& cfg, std::size_t clamp_left) {
  if (trigger_pos < clamp_left) {
    throw LogicError("trigger at " + std::to_string(trigger_pos) +
                     " lies inside the committed region ending at " + std::to_string(clamp_left));
  }
  const std::size_t reach = std::min(cfg.back(), trigger_pos - clamp_left);
  const std::size_t left = trigger_pos - reach;
  return Window{left, saturating_add(trigger_pos, cfg.fwd())};
}

ControllerDecision step(const ModeState& state, double h, std::size_t pos,
                        const ControllerConfig& cfg, const CoverageMap& cov) {
  if (state.mode() == Mode::thinking && h >= cfg.tau_up()) {
    const std::size_t end = state.in_window() ? *state.window_end() : pos;
    const std::size_t right = saturating_add(pos, cfg.fwd());
    if (right > end) {
      return {Mode::thinking, WindowAction::extend_window, state.in_window() ? end + 1 : pos, right};
    }
  }

  if (state.in_window()) {
    if (pos < *state.window_end()) {
      return {Mode::thinking, WindowAction::none};
    }
    return {h > cfg.tau_down() ? Mode::thinking : Mode::concise, WindowAction::close_window};
  }

  if (state.mode() == Mode::concise) {
    if (h >= cfg.tau_up() && !cov.contains(pos)) {
      const Window w = open_window(pos, cfg, cov.frontier());
      return {Mode::thinking, WindowAction::open_window, w.left, w.right};
    }
    return {Mode::concise, WindowAction::none};
  }

  if (h > cfg.tau_down()) {
    return {Mode::thinking, WindowAction::none};
  }
  return {Mode::concise, WindowAction::anneal};
}

ModeState apply(const ModeState& state, const ControllerDecision& decision) {
  switch (decision.action) {
    case WindowAction::open_window:
    case WindowAction::extend_window:
      return ModeState(Mode::thinking, decision.right);
    case WindowAction::close_window:
    case WindowAction::anneal:
      return ModeState(decision.next_mode, std::nullopt);
    case WindowAction::none:
      break;
  }
  return ModeState(decision.next_mode, state.window_end());
}

ControllerDecision Controller::observe(double h, std::size_t pos) {
  ControllerDecision d = step(state_, h, pos, cfg_, coverage_);
  if (d.action == WindowAction::open_window || d.action == WindowAction::extend_window) {
    coverage_.mark(d.left, d.right);
  }
  state_ = apply(state_, d);
  return d;
}

}  // namespace mixdecode
