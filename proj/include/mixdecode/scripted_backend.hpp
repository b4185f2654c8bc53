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
#include <string>
#include <string_view>
#include <vector>

#include "mixdecode/backend.hpp"
#include "mixdecode/types.hpp"

namespace mixdecode {

enum class Segment : std::uint8_t { routine, fork };

/// A synthetic reasoning task: routine stretches that either policy gets
/// right, and forks where the short policy guesses (high entropy, accuracy
/// p_s) while the long policy deliberates for d tokens and then answers with
/// accuracy p_l.
struct ToyEpisodeSpec {
  std::vector<Segment> segments;
  std::size_t routine_len_long = 4;
  std::size_t routine_len_short = 1;
  std::size_t fork_deliberation_len = 6;
  double p_short_correct = 0.55;
  double p_long_correct = 0.95;
  double fork_entropy_concise = 0.9;
  double routine_entropy = 0.05;
  double deliberation_entropy = 0.5;

  /// Throws ConfigError on any violated invariant, including entropy targets
  /// the 64-token vocabulary cannot realise.
  void validate() const;

  /// 'R' = routine, 'F' = fork, e.g. "RRRFRRRF".
  static ToyEpisodeSpec from_pattern(std::string_view pattern);

  std::size_t fork_count() const noexcept;
  std::size_t routine_count() const noexcept { return segments.size() - fork_count(); }
  /// Completion length under the short (long) policy alone, eos excluded.
  std::size_t concise_length() const noexcept;
  std::size_t thinking_length() const noexcept;
};

/// Named scenarios. "S1": R,R,R,F with routine lengths 2/1 and d=1 (small
/// enough to simulate by hand). "fork3": (R,R,R,F) x 3 with default lengths.
/// "routine": nine routine segments. "pattern:<RF...>": defaults with a custom
/// layout. Throws ConfigError for unknown names.
ToyEpisodeSpec scenario(std::string_view name);

/// Token layout of the scripted vocabulary. Every semantic class owns a main
/// token plus synonyms, so class probabilities and entropy can be set
/// independently; the scripted state machine only looks at the class.
namespace toy_vocab {
inline constexpr std::size_t kSize = 64;
inline constexpr TokenId kEos = 0;
inline constexpr TokenId kPrompt = 1;

struct Range {
  TokenId first;
  std::size_t count;

  bool contains(TokenId t) const noexcept { return t >= first && t < first + count; }
};

inline constexpr Range kRoutineCont{2, 2};
inline constexpr Range kRoutineEnd{4, 2};
inline constexpr Range kDeliberate{6, 10};
inline constexpr Range kCorrectBranch{16, 24};
inline constexpr Range kWrongBranch{40, 24};
}  // namespace toy_vocab

enum class TokenClass : std::uint8_t {
  eos,
  prompt,
  routine_cont,
  routine_end,
  deliberate,
  correct_branch,
  wrong_branch,
  unused,
};

TokenClass classify(TokenId token) noexcept;

/// Position inside an episode. `progress` counts tokens already emitted in the
/// current segment.
struct EpisodeState {
  enum class Kind : std::uint8_t { routine, fork, end };

  Kind kind = Kind::end;
  std::size_t segment = 0;
  std::size_t progress = 0;

  friend bool operator==(const EpisodeState&, const EpisodeState&) = default;
};

/// Per-state logit tables for the long (thinking) and short (concise) policy.
/// The difference between the two tables plays the role of the adapter delta.
class PolicyPair {
 public:
  static constexpr double kLogitFloor = -1000.0;

  static PolicyPair for_episode(const ToyEpisodeSpec& spec);

  std::size_t vocab_size() const noexcept { return toy_vocab::kSize; }
  std::span<const double> long_logits(const EpisodeState& s) const;
  std::span<const double> short_logits(const EpisodeState& s) const;

 private:
  using Table = std::vector<std::vector<double>>;

  std::size_t row(const EpisodeState& s) const;

  std::size_t routine_rows_ = 0;
  std::size_t fork_rows_ = 0;
  Table long_;
  Table short_;
};

struct InterpolatedDistribution {
  NextTokenDistribution dist;
  bool clamped = false;  // alpha fell outside [alpha_low, alpha_high]
};

/// Linear interpolation in logit space: w = (alpha - alpha_low) /
/// (alpha_high - alpha_low), logits = (1 - w) * long + w * short, then softmax.
InterpolatedDistribution interpolate_logits(const PolicyPair& pair, const EpisodeState& state,
                                            double alpha, double alpha_low, double alpha_high);

/// In-process backend playing a ToyEpisodeSpec.
class ScriptedBackend : public ModelBackend {
 public:
  struct Options {
    double alpha_low = 0.0;
    double alpha_high = 1.0;
    bool kv_invariant_adapter = false;
    std::string name = "custom";
  };

  ScriptedBackend(ToyEpisodeSpec spec, Options options);
  explicit ScriptedBackend(ToyEpisodeSpec spec) : ScriptedBackend(std::move(spec), Options{}) {}

  std::unique_ptr<BackendSession> open_session(const std::string& session_id,
                                               std::span<const TokenId> prompt,
                                               double alpha) const override;
  std::string describe() const override { return "scripted:" + options_.name; }

  const ToyEpisodeSpec& spec() const noexcept { return spec_; }
  const PolicyPair& policy() const noexcept { return pair_; }
  const Options& options() const noexcept { return options_; }
  const Capabilities& capabilities() const noexcept { return caps_; }

  /// Default prompt for this task.
  std::vector<TokenId> prompt() const { return std::vector<TokenId>(8, toy_vocab::kPrompt); }

  EpisodeState initial_state() const noexcept;
  EpisodeState advance(const EpisodeState& s, TokenId token) const noexcept;

  /// True iff every fork was resolved (one branch token per fork) and every
  /// branch token among `completion` is a correct one.
  bool grade(std::span<const TokenId> completion) const noexcept;

 private:
  ToyEpisodeSpec spec_;
  Options options_;
  PolicyPair pair_;
  Capabilities caps_;
};

/// Scripted session, exposed so tests can drive it step by step.
class ScriptedSession : public BackendSession {
 public:
  ScriptedSession(const ScriptedBackend& backend, std::size_t prompt_len);

  const Capabilities& capabilities() const override { return backend_.capabilities(); }
  std::size_t vocab_size() const override { return toy_vocab::kSize; }
  std::size_t length() const override { return prompt_len_ + history_.size(); }
  StepResult step(double alpha, double temperature, std::uint64_t seed_draw) override;
  void rollback(std::size_t to_len) override;

  const EpisodeState& state() const noexcept { return state_; }
  std::size_t clamp_warnings() const noexcept { return clamp_warnings_; }

 private:
  const ScriptedBackend& backend_;
  std::size_t prompt_len_;
  EpisodeState state_;
  std::vector<EpisodeState> history_;  // state before each completion token
  std::size_t clamp_warnings_ = 0;
};

}  // namespace mixdecode
