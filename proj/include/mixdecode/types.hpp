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
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mixdecode {

using TokenId = std::uint32_t;

// Errors. ConfigError and InvalidVocabularyError are caller mistakes;
// LogicError means an engine invariant broke (a bug, never expected input).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidVocabularyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class LogicError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class BackendError : public std::runtime_error {
 public:
  BackendError(std::string session, const std::string& what)
      : std::runtime_error("[session " + session + "] " + what),
        session_(std::move(session)) {}

  const std::string& session() const noexcept { return session_; }

 private:
  std::string session_;
};

enum class Mode : std::uint8_t { concise, thinking };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

/// Probabilities over a vocabulary. Always valid once constructed: entries are
/// finite and non-negative, there are at least two of them, and they sum to 1
/// within 1e-9.
class NextTokenDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit NextTokenDistribution(std::vector<double> probs);

  /// Softmax of `logits`. Entries equal to -inf get probability 0.
  static NextTokenDistribution from_logits(std::span<const double> logits);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t vocab_size() const noexcept { return probs_.size(); }
  double prob(TokenId id) const { return probs_.at(id); }

 private:
  std::vector<double> probs_;
};

/// Adapter strength attached to a mode. Lower strength means more thinking.
struct AdapterStrength {
  double alpha = 0.0;
  Mode role = Mode::concise;
};

/// Thresholds, window extents and adapter strengths of the mode controller.
///
/// Validation only insists on finite values with tau_down < tau_up and
/// 0 <= alpha_low < alpha_high. Thresholds outside [0, 1] are allowed on
/// purpose: tau_up > 1 never triggers, tau_down < 0 never anneals.
class ControllerConfig {
 public:
  ControllerConfig(double tau_up, double tau_down, std::size_t back, std::size_t fwd,
                   double alpha_low = 0.0, double alpha_high = 1.0);

  /// Trigger unreachable: the decode stays concise throughout.
  static ControllerConfig pure_concise(double alpha_low = 0.0, double alpha_high = 1.0);
  /// Trigger on the very first token with a window reaching `max_len`, never anneal.
  static ControllerConfig pure_thinking(std::size_t max_len, double alpha_low = 0.0,
                                        double alpha_high = 1.0);

  double tau_up() const noexcept { return tau_up_; }
  double tau_down() const noexcept { return tau_down_; }
  std::size_t back() const noexcept { return back_; }
  std::size_t fwd() const noexcept { return fwd_; }
  double alpha_low() const noexcept { return alpha_low_; }
  double alpha_high() const noexcept { return alpha_high_; }

  double alpha_for(Mode mode) const noexcept {
    return mode == Mode::thinking ? alpha_low_ : alpha_high_;
  }
  AdapterStrength strength(Mode mode) const noexcept { return {alpha_for(mode), mode}; }

 private:
  double tau_up_;
  double tau_down_;
  std::size_t back_;
  std::size_t fwd_;
  double alpha_low_;
  double alpha_high_;
};

/// Controller mode. `window_end` is set exactly while a regeneration window
/// is active, and a window implies thinking mode.
class ModeState {
 public:
  ModeState() = default;
  ModeState(Mode mode, std::optional<std::size_t> window_end);

  Mode mode() const noexcept { return mode_; }
  bool in_window() const noexcept { return window_end_.has_value(); }
  std::optional<std::size_t> window_end() const noexcept { return window_end_; }

  friend bool operator==(const ModeState&, const ModeState&) = default;

 private:
  Mode mode_ = Mode::concise;
  std::optional<std::size_t> window_end_;
};

// ---------------------------------------------------------------------------
// Decode trace

struct KeptToken {
  std::size_t pos = 0;
  TokenId token = 0;
  Mode mode = Mode::concise;
  double entropy = 0.0;
  double alpha = 0.0;
  std::uint64_t seq = 0;  // index of the forward step that produced it
};

struct DiscardedToken {
  std::size_t pos = 0;  // position the token held before the rollback
  TokenId token = 0;
  Mode mode = Mode::concise;
  double entropy = 0.0;
  std::uint64_t seq = 0;
};

enum class CloseReason : std::uint8_t { end, eos, budget };
enum class BudgetKind : std::uint8_t { kept, compute };

std::string_view to_string(CloseReason reason) noexcept;
std::string_view to_string(BudgetKind kind) noexcept;

namespace event {
struct Trigger {
  std::size_t pos;
  double entropy;
  TokenId token;  // the probe token, rolled back with the window
  Mode mode;
};
struct WindowOpen {
  std::size_t left;
  std::size_t right;
};
/// A high-entropy token while already thinking pushes the window end out to
/// pos + F (reopening a window if the decode was lingering in thinking mode).
/// Nothing is rolled back.
struct WindowExtend {
  std::size_t pos;
  std::size_t right;
};
struct WindowClose {
  std::size_t pos;
  CloseReason reason;
};
struct Anneal {
  std::size_t pos;
};
struct Eos {
  std::size_t pos;
  Mode mode;
  double entropy;
};
struct BudgetStop {
  std::size_t pos;
  BudgetKind kind;
};
struct Prefill {
  Mode mode;
  std::size_t n_tokens;
};
}  // namespace event

using EventBody =
    std::variant<event::Trigger, event::WindowOpen, event::WindowExtend, event::WindowClose,
                 event::Anneal, event::Eos, event::BudgetStop, event::Prefill>;

struct TraceEvent {
  std::uint64_t seq = 0;  // forward step the event is attached to
  EventBody body;
};

/// Ledger figures copied into the trace when decoding finishes.
struct LedgerSummary {
  std::size_t switches = 0;
  std::size_t total_prefill_tokens = 0;
  std::size_t prefill_if_evicted = 0;
  bool shared_cache = false;
};

struct DecodeTrace {
  std::size_t prompt_len = 0;
  std::size_t vocab_size = 0;
  std::vector<KeptToken> kept;
  std::vector<DiscardedToken> discarded;
  std::vector<TraceEvent> events;
  /// Tokens committed to the sequence (kept now or later discarded), counted
  /// by the engine as they are generated. Trigger probes are not included.
  std::size_t compute_tokens = 0;
  std::size_t probe_steps = 0;
  LedgerSummary ledger;

  std::size_t thinking_tokens() const noexcept;
  double thinking_coverage() const noexcept;
  std::size_t trigger_count() const noexcept;
  bool ended_by_eos() const noexcept;

  /// Checks the structural invariants (consecutive positions, entropies in
  /// [0, 1], windows closed). Returns a description of the first violation.
  std::optional<std::string> check_invariants() const;
};

}  // namespace mixdecode
