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

#include "mixdecode/engine.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "mixdecode/entropy.hpp"
#include "mixdecode/sampling.hpp"

namespace mixdecode {

void EngineConfig::validate() const {
  if (max_kept_tokens == 0) throw ConfigError("max_kept_tokens must be positive");
  if (max_compute_tokens < max_kept_tokens) {
    throw ConfigError("max_compute_tokens must be at least max_kept_tokens");
  }
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be finite and non-negative");
  }
}

std::string EngineConfig::effective_session_id() const {
  if (!session_id.empty()) return session_id;
  char buf[32];
  std::snprintf(buf, sizeof buf, "md-%016llx", static_cast<unsigned long long>(seed));
  return buf;
}

DecodeSession::DecodeSession(std::span<const TokenId> prompt, const ModelBackend& backend,
                             EngineConfig cfg)
    : cfg_(std::move(cfg)),
      prompt_len_(prompt.size()),
      controller_(cfg_.controller),
      ledger_(prompt.size(), false),
      rng_(cfg_.seed) {
  cfg_.validate();
  if (prompt.empty()) throw ConfigError("prompt must not be empty");
  session_ = backend.open_session(cfg_.effective_session_id(), prompt,
                                  cfg_.controller.alpha_for(Mode::concise));
  ledger_ = KVCacheLedger(prompt_len_, session_->capabilities().kv_invariant_adapter);
  trace_.prompt_len = prompt_len_;
  trace_.vocab_size = session_->vocab_size();
}

void DecodeSession::stop(BudgetKind kind) {
  const std::size_t pos = trace_.kept.size();
  if (controller_.state().in_window()) {
    push_event(next_seq_, event::WindowClose{pos, CloseReason::budget});
  }
  push_event(next_seq_, event::BudgetStop{pos, kind});
  finished_ = true;
}

void DecodeSession::step() {
  if (finished_) return;
  const std::size_t pos = trace_.kept.size();
  if (pos >= cfg_.max_kept_tokens) return stop(BudgetKind::kept);
  if (trace_.compute_tokens >= cfg_.max_compute_tokens) return stop(BudgetKind::compute);

  const Mode mode = controller_.state().mode();
  const std::uint64_t seq = next_seq_++;
  if (mode != cache_mode_) {
    const std::size_t cost = ledger_.on_switch(mode, prompt_len_ + pos);
    push_event(seq, event::Prefill{mode, cost});
    cache_mode_ = mode;
  }

  const double alpha = cfg_.controller.alpha_for(mode);
  const std::uint64_t draw = rng_() >> (64 - kDrawBits);
  StepResult r = session_->step(alpha, cfg_.temperature, draw);
  const double h = r.dist ? normalized_entropy(*r.dist) : r.entropy;
  if (!(h >= 0.0 && h <= 1.0)) {
    throw BackendError(cfg_.effective_session_id(), "backend reported entropy outside [0, 1]");
  }

  if (r.eos) {
    if (controller_.state().in_window()) {
      push_event(seq, event::WindowClose{pos, CloseReason::eos});
    }
    push_event(seq, event::Eos{pos, mode, h});
    finished_ = true;
    return;
  }

  const std::size_t clamp = controller_.coverage().frontier();
  const ControllerDecision d = controller_.observe(h, pos);

  if (d.action == WindowAction::open_window) {
    // The probe token at `pos` goes away with the rollback.
    ++trace_.probe_steps;
    push_event(seq, event::Trigger{pos, h, r.token, mode});
    push_event(seq, event::WindowOpen{d.left, d.right});
    clamp_left_ = clamp;
    rollback(d.left);
    return;
  }

  trace_.kept.push_back({pos, r.token, mode, h, alpha, seq});
  ++trace_.compute_tokens;
  ledger_.on_generate(mode, 1);

  if (d.action == WindowAction::extend_window) {
    push_event(seq, event::WindowExtend{pos, d.right});
  } else if (d.action == WindowAction::close_window) {
    push_event(seq, event::WindowClose{pos, CloseReason::end});
    if (d.next_mode == Mode::concise) push_event(seq, event::Anneal{pos});
  } else if (d.action == WindowAction::anneal) {
    push_event(seq, event::Anneal{pos});
  }
}

void DecodeSession::rollback(std::size_t to_pos) {
  auto& kept = trace_.kept;
  if (to_pos > kept.size()) {
    throw LogicError("rollback to " + std::to_string(to_pos) + " beyond kept length " +
                     std::to_string(kept.size()));
  }
  if (to_pos < clamp_left_) {
    throw LogicError("rollback to " + std::to_string(to_pos) + " crosses committed position " +
                     std::to_string(clamp_left_));
  }
  for (std::size_t i = to_pos; i < kept.size(); ++i) {
    const KeptToken& k = kept[i];
    trace_.discarded.push_back({k.pos, k.token, k.mode, k.entropy, k.seq});
  }
  kept.resize(to_pos);
  session_->rollback(prompt_len_ + to_pos);
  ledger_.truncate(prompt_len_ + to_pos);
}

DecodeTrace DecodeSession::finish() {
  if (!finished_) throw LogicError("finish() called on an unfinished decode");
  session_->close();
  trace_.ledger = ledger_.summary();
  return std::move(trace_);
}

DecodeTrace decode(std::span<const TokenId> prompt, const ModelBackend& backend,
                   const EngineConfig& cfg) {
  DecodeSession session(prompt, backend, cfg);
  while (!session.finished()) session.step();
  return session.finish();
}

EpisodeResult evaluate(DecodeTrace trace, bool correct) {
  EpisodeResult r;
  r.correct = correct;
  r.kept_tokens = trace.kept.size();
  r.compute_tokens = trace.compute_tokens;
  r.thinking_coverage = trace.thinking_coverage();
  r.overhead_ratio =
      r.compute_tokens > 0 ? overhead_ratio(trace.ledger.total_prefill_tokens, r.compute_tokens) : 0.0;
  r.trace = std::move(trace);
  return r;
}

EpisodeResult run_episode(const ScriptedBackend& backend, const EngineConfig& cfg) {
  const std::vector<TokenId> prompt = backend.prompt();
  DecodeTrace trace = decode(prompt, backend, cfg);
  std::vector<TokenId> completion;
  completion.reserve(trace.kept.size());
  for (const auto& k : trace.kept) completion.push_back(k.token);
  const bool correct = backend.grade(completion);
  return evaluate(std::move(trace), correct);
}

}  // namespace mixdecode
