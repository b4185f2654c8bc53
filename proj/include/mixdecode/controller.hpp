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
#include <span>
#include <vector>

#include "mixdecode/types.hpp"

namespace mixdecode {

/// Completion positions that have belonged to some regeneration window.
/// Windows are disjoint and opened left to right, so the covered set is kept
/// as sorted closed intervals.
class CoverageMap {
 public:
  struct Interval {
    std::size_t left;
    std::size_t right;
  };

  bool contains(std::size_t pos) const noexcept;

  /// Adds [left, right]. Throws LogicError if left > right or the interval
  /// overlaps existing coverage.
  void mark(std::size_t left, std::size_t right);

  /// One past the largest covered position (0 when empty). Rollback never
  /// goes below this point.
  std::size_t frontier() const noexcept { return spans_.empty() ? 0 : spans_.back().right + 1; }

  std::size_t covered_count() const noexcept;
  std::span<const Interval> intervals() const noexcept { return spans_; }

 private:
  std::vector<Interval> spans_;
};

CoverageMap mark_covered(CoverageMap cov, std::size_t left, std::size_t right);

enum class WindowAction : std::uint8_t { none, open_window, extend_window, close_window, anneal };

/// `left`/`right` are meaningful for open_window (the new window) and
/// extend_window (the newly covered span; right is the new window end). A
/// close_window with next_mode == concise means the window ended and the mode
/// annealed at once.
struct ControllerDecision {
  Mode next_mode = Mode::concise;
  WindowAction action = WindowAction::none;
  std::size_t left = 0;
  std::size_t right = 0;
};

struct Window {
  std::size_t left;
  std::size_t right;

  std::size_t length() const noexcept { return right - left + 1; }
};

/// Window for a trigger at `trigger_pos`: left = max(clamp_left, t - B),
/// right = t + F. Throws LogicError if the trigger lies below clamp_left.
Window open_window(std::size_t trigger_pos, const ControllerConfig& cfg, std::size_t clamp_left);

/// One hysteresis update for the token observed at `pos` with normalized
/// entropy `h`, decoded under `state`. Returns the mode for the next position.
///
///   concise,  h >= tau_up, pos uncovered  -> thinking, open window
///   thinking, h >= tau_up, pos + F beyond
///     the current window end              -> thinking, extend window to pos + F
///   in window, pos <  window_end          -> thinking
///   in window, pos >= window_end          -> close; thinking if h > tau_down
///   thinking,  h > tau_down               -> thinking
///   thinking,  h <= tau_down              -> concise, anneal
///   otherwise                             -> concise
///
/// New windows are clamped at cov.frontier(). Extension never rolls back;
/// while lingering in thinking mode after a window it reopens one at pos.
ControllerDecision step(const ModeState& state, double h, std::size_t pos,
                        const ControllerConfig& cfg, const CoverageMap& cov);

ModeState apply(const ModeState& state, const ControllerDecision& decision);

/// Mode state plus coverage for one decode session.
class Controller {
 public:
  explicit Controller(ControllerConfig cfg) : cfg_(cfg) {}

  /// Runs `step`, then advances the state and records coverage of any new window.
  ControllerDecision observe(double h, std::size_t pos);

  const ModeState& state() const noexcept { return state_; }
  const CoverageMap& coverage() const noexcept { return coverage_; }
  const ControllerConfig& config() const noexcept { return cfg_; }

 private:
  ControllerConfig cfg_;
  ModeState state_;
  CoverageMap coverage_;
};

}  // namespace mixdecode
