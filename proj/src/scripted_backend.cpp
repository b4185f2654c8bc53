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

#include "mixdecode/scripted_backend.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixdecode/entropy.hpp"
#include "mixdecode/sampling.hpp"

namespace mixdecode {

namespace {

const double kLogV = std::log(static_cast<double>(toy_vocab::kSize));

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

// Entropy (nats) of a class of n tokens: main token 1 - beta, the n - 1
// synonyms beta / (n - 1) each.
double class_entropy(std::size_t n, double beta) {
  double h = 0.0;
  if (beta < 1.0) h -= (1.0 - beta) * std::log(1.0 - beta);
  if (beta > 0.0) h -= beta * std::log(beta / static_cast<double>(n - 1));
  return h;
}

double max_class_entropy(std::size_t n) { return std::log(static_cast<double>(n)); }

// Smallest synonym share whose class entropy reaches `target` nats (entropy is
// monotone in the share on [0, (n-1)/n]); solved by bisection, returning the
// upper bracket so the target is never undershot.
double solve_skew(std::size_t n, double target) {
  if (target <= 0.0 || n < 2) return 0.0;
  double lo = 0.0;
  double hi = static_cast<double>(n - 1) / static_cast<double>(n);
  if (target >= class_entropy(n, hi)) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (class_entropy(n, mid) < target ? lo : hi) = mid;
  }
  return hi;
}

void fill_class(std::vector<double>& probs, toy_vocab::Range range, double mass, double beta) {
  probs[range.first] += mass * (1.0 - beta);
  for (std::size_t i = 1; i < range.count; ++i) {
    probs[range.first + i] += mass * beta / static_cast<double>(range.count - 1);
  }
}

std::vector<double> class_row(toy_vocab::Range range, double normalized_entropy) {
  std::vector<double> probs(toy_vocab::kSize, 0.0);
  fill_class(probs, range, 1.0, solve_skew(range.count, normalized_entropy * kLogV));
  return probs;
}

std::vector<double> to_logits(const std::vector<double>& probs) {
  std::vector<double> logits(probs.size());
  std::transform(probs.begin(), probs.end(), logits.begin(), [](double p) {
    return p > 0.0 ? std::log(p) : PolicyPair::kLogitFloor;
  });
  return logits;
}

// The fork row is a lower bound ("at least fork_entropy_concise"); the margin
// absorbs rounding in the logit round trip and softmax.
constexpr double kForkEntropyMargin = 1e-9;

double fork_short_class_target(const ToyEpisodeSpec& spec) {
  return (spec.fork_entropy_concise + kForkEntropyMargin) * kLogV -
         binary_entropy(spec.p_short_correct);
}

}  // namespace

// ---------------------------------------------------------------------------
// ToyEpisodeSpec

void ToyEpisodeSpec::validate() const {
  if (routine_len_long == 0 || routine_len_short == 0) {
    throw ConfigError("routine segments need at least one token per policy");
  }
  if (!(p_short_correct > 0.0 && p_short_correct < 1.0)) {
    throw ConfigError("p_short_correct must lie in (0, 1)");
  }
  if (!(p_long_correct > p_short_correct && p_long_correct <= 1.0)) {
    throw ConfigError("p_long_correct must lie in (p_short_correct, 1]");
  }
  for (double e : {fork_entropy_concise, routine_entropy, deliberation_entropy}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("entropy targets must lie in [0, 1]");
  }
  if (!(fork_entropy_concise > routine_entropy)) {
    throw ConfigError("fork_entropy_concise must exceed routine_entropy");
  }
  const double tol = 1e-12;
  if (routine_entropy * kLogV > max_class_entropy(toy_vocab::kRoutineEnd.count) + tol) {
    throw ConfigError("routine_entropy above what the scripted vocabulary can realise");
  }
  if (deliberation_entropy * kLogV > max_class_entropy(toy_vocab::kDeliberate.count) + tol) {
    throw ConfigError("deliberation_entropy above what the scripted vocabulary can realise");
  }
  if (fork_short_class_target(*this) > max_class_entropy(toy_vocab::kCorrectBranch.count) + tol) {
    throw ConfigError("fork_entropy_concise unattainable for this p_short_correct");
  }
}

ToyEpisodeSpec ToyEpisodeSpec::from_pattern(std::string_view pattern) {
  ToyEpisodeSpec spec;
  for (char c : pattern) {
    if (c == 'R' || c == 'r') {
      spec.segments.push_back(Segment::routine);
    } else if (c == 'F' || c == 'f') {
      spec.segments.push_back(Segment::fork);
    } else {
      throw ConfigError(std::string("segment pattern accepts only R and F, got '") + c + "'");
    }
  }
  return spec;
}

std::size_t ToyEpisodeSpec::fork_count() const noexcept {
  return static_cast<std::size_t>(std::count(segments.begin(), segments.end(), Segment::fork));
}

std::size_t ToyEpisodeSpec::concise_length() const noexcept {
  return routine_count() * routine_len_short + fork_count();
}

std::size_t ToyEpisodeSpec::thinking_length() const noexcept {
  return routine_count() * routine_len_long + fork_count() * (fork_deliberation_len + 1);
}

ToyEpisodeSpec scenario(std::string_view name) {
  if (name == "S1") {
    ToyEpisodeSpec spec = ToyEpisodeSpec::from_pattern("RRRF");
    spec.routine_len_long = 2;
    spec.routine_len_short = 1;
    spec.fork_deliberation_len = 1;
    return spec;
  }
  if (name == "fork3") return ToyEpisodeSpec::from_pattern("RRRFRRRFRRRF");
  if (name == "routine") return ToyEpisodeSpec::from_pattern("RRRRRRRRR");
  constexpr std::string_view kPattern = "pattern:";
  if (name.starts_with(kPattern)) return ToyEpisodeSpec::from_pattern(name.substr(kPattern.size()));
  throw ConfigError("unknown scripted scenario '" + std::string(name) + "'");
}

TokenClass classify(TokenId token) noexcept {
  using namespace toy_vocab;
  if (token == kEos) return TokenClass::eos;
  if (token == kPrompt) return TokenClass::prompt;
  if (kRoutineCont.contains(token)) return TokenClass::routine_cont;
  if (kRoutineEnd.contains(token)) return TokenClass::routine_end;
  if (kDeliberate.contains(token)) return TokenClass::deliberate;
  if (kCorrectBranch.contains(token)) return TokenClass::correct_branch;
  if (kWrongBranch.contains(token)) return TokenClass::wrong_branch;
  return TokenClass::unused;
}

// ---------------------------------------------------------------------------
// PolicyPair

PolicyPair PolicyPair::for_episode(const ToyEpisodeSpec& spec) {
  spec.validate();
  using namespace toy_vocab;

  PolicyPair pair;
  pair.routine_rows_ = std::max(spec.routine_len_long, spec.routine_len_short);
  pair.fork_rows_ = spec.fork_deliberation_len + 1;

  for (std::size_t k = 0; k < pair.routine_rows_; ++k) {
    auto routine = [&](std::size_t len) {
      return to_logits(class_row(k + 1 >= len ? kRoutineEnd : kRoutineCont, spec.routine_entropy));
    };
    pair.long_.push_back(routine(spec.routine_len_long));
    pair.short_.push_back(routine(spec.routine_len_short));
  }

  const double short_beta = solve_skew(kCorrectBranch.count, fork_short_class_target(spec));
  std::vector<double> short_fork(kSize, 0.0);
  fill_class(short_fork, kCorrectBranch, spec.p_short_correct, short_beta);
  fill_class(short_fork, kWrongBranch, 1.0 - spec.p_short_correct, short_beta);

  std::vector<double> long_branch(kSize, 0.0);
  long_branch[kCorrectBranch.first] = spec.p_long_correct;
  long_branch[kWrongBranch.first] = 1.0 - spec.p_long_correct;

  for (std::size_t j = 0; j < pair.fork_rows_; ++j) {
    pair.long_.push_back(j < spec.fork_deliberation_len
                             ? to_logits(class_row(kDeliberate, spec.deliberation_entropy))
                             : to_logits(long_branch));
    pair.short_.push_back(to_logits(short_fork));
  }

  std::vector<double> end(kSize, 0.0);
  end[kEos] = 1.0;
  pair.long_.push_back(to_logits(end));
  pair.short_.push_back(to_logits(end));
  return pair;
}

std::size_t PolicyPair::row(const EpisodeState& s) const {
  switch (s.kind) {
    case EpisodeState::Kind::routine:
      return std::min(s.progress, routine_rows_ - 1);
    case EpisodeState::Kind::fork:
      return routine_rows_ + std::min(s.progress, fork_rows_ - 1);
    case EpisodeState::Kind::end:
      break;
  }
  return routine_rows_ + fork_rows_;
}

std::span<const double> PolicyPair::long_logits(const EpisodeState& s) const {
  return long_.at(row(s));
}

std::span<const double> PolicyPair::short_logits(const EpisodeState& s) const {
  return short_.at(row(s));
}

InterpolatedDistribution interpolate_logits(const PolicyPair& pair, const EpisodeState& state,
                                            double alpha, double alpha_low, double alpha_high) {
  if (!(alpha_low < alpha_high)) {
    throw ConfigError("interpolation requires alpha_low < alpha_high");
  }
  const bool clamped = alpha < alpha_low || alpha > alpha_high;
  const double a = std::clamp(alpha, alpha_low, alpha_high);
  const double w = (a - alpha_low) / (alpha_high - alpha_low);

  const auto lo = pair.long_logits(state);
  const auto hi = pair.short_logits(state);
  std::vector<double> logits(lo.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logits[i] = (1.0 - w) * lo[i] + w * hi[i];
  }
  return {NextTokenDistribution::from_logits(logits), clamped};
}

// ---------------------------------------------------------------------------
// ScriptedBackend

ScriptedBackend::ScriptedBackend(ToyEpisodeSpec spec, Options options)
    : spec_(std::move(spec)),
      options_(std::move(options)),
      pair_(PolicyPair::for_episode(spec_)),
      caps_{true, options_.kv_invariant_adapter, true} {
  if (!(options_.alpha_low < options_.alpha_high)) {
    throw ConfigError("scripted backend requires alpha_low < alpha_high");
  }
}

std::unique_ptr<BackendSession> ScriptedBackend::open_session(const std::string& /*session_id*/,
                                                              std::span<const TokenId> prompt,
                                                              double /*alpha*/) const {
  return std::make_unique<ScriptedSession>(*this, prompt.size());
}

EpisodeState ScriptedBackend::initial_state() const noexcept {
  if (spec_.segments.empty()) return {};
  return {spec_.segments.front() == Segment::fork ? EpisodeState::Kind::fork
                                                  : EpisodeState::Kind::routine,
          0, 0};
}

EpisodeState ScriptedBackend::advance(const EpisodeState& s, TokenId token) const noexcept {
  const TokenClass cls = classify(token);
  switch (s.kind) {
    case EpisodeState::Kind::end:
      return s;
    case EpisodeState::Kind::routine:
      if (cls == TokenClass::routine_cont) return {s.kind, s.segment, s.progress + 1};
      break;
    case EpisodeState::Kind::fork:
      if (cls == TokenClass::deliberate) return {s.kind, s.segment, s.progress + 1};
      break;
  }
  const std::size_t next = s.segment + 1;
  if (next >= spec_.segments.size()) return {EpisodeState::Kind::end, next, 0};
  return {spec_.segments[next] == Segment::fork ? EpisodeState::Kind::fork
                                                : EpisodeState::Kind::routine,
          next, 0};
}

bool ScriptedBackend::grade(std::span<const TokenId> completion) const noexcept {
  std::size_t resolved = 0;
  for (TokenId t : completion) {
    const TokenClass cls = classify(t);
    if (cls == TokenClass::wrong_branch) return false;
    if (cls == TokenClass::correct_branch) ++resolved;
  }
  return resolved == spec_.fork_count();
}

// ---------------------------------------------------------------------------
// ScriptedSession

ScriptedSession::ScriptedSession(const ScriptedBackend& backend, std::size_t prompt_len)
    : backend_(backend), prompt_len_(prompt_len), state_(backend.initial_state()) {}

StepResult ScriptedSession::step(double alpha, double temperature, std::uint64_t seed_draw) {
  const auto& opt = backend_.options();
  InterpolatedDistribution interp =
      interpolate_logits(backend_.policy(), state_, alpha, opt.alpha_low, opt.alpha_high);
  if (interp.clamped) ++clamp_warnings_;

  StepResult r;
  r.token = sample_token(interp.dist.probs(), temperature, seed_draw);
  r.entropy = normalized_entropy(interp.dist);
  r.logprob = std::log(interp.dist.prob(r.token));
  r.eos = classify(r.token) == TokenClass::eos;
  r.dist = std::move(interp.dist);
  if (!r.eos) {
    history_.push_back(state_);
    state_ = backend_.advance(state_, r.token);
  }
  return r;
}

void ScriptedSession::rollback(std::size_t to_len) {
  if (to_len < prompt_len_ || to_len > length()) {
    throw LogicError("scripted rollback to " + std::to_string(to_len) + " outside [" +
                     std::to_string(prompt_len_) + ", " + std::to_string(length()) + "]");
  }
  const std::size_t keep = to_len - prompt_len_;
  if (keep == history_.size()) return;
  state_ = history_[keep];
  history_.resize(keep);
}

}  // namespace mixdecode
