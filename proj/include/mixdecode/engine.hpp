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
#include <memory>
#include <random>
#include <span>
#include <string>

#include "mixdecode/backend.hpp"
#include "mixdecode/controller.hpp"
#include "mixdecode/kv_ledger.hpp"
#include "mixdecode/scripted_backend.hpp"
#include "mixdecode/types.hpp"

namespace mixdecode {

struct EngineConfig {
  ControllerConfig controller;
  std::size_t max_kept_tokens = 4096;
  /// Cap on kept + discarded tokens; bounds the work of any backend.
  std::size_t max_compute_tokens = 16384;
  /// 0 selects greedy decoding.
  double temperature = 1.0;
  std::uint64_t seed = 0;
  /// Empty: derived from the seed.
  std::string session_id;

  void validate() const;
  std::string effective_session_id() const;
};

/// State of one decode: kept sequence, controller, KV ledger, RNG and the
/// trace under construction. Strictly sequential; one per session.
class DecodeSession {
 public:
  DecodeSession(std::span<const TokenId> prompt, const ModelBackend& backend, EngineConfig cfg);

  bool finished() const noexcept { return finished_; }

  /// One forward step: budget checks, lazy switch prefill, sample, controller
  /// update, and rollback when a window opens.
  void step();

  /// Truncates the kept sequence to `to_pos` tokens, moving the tail to the
  /// discarded list and truncating the backend and the KV ledger. The RNG is
  /// not rewound. Throws LogicError if to_pos exceeds the kept length or lies
  /// below the current clamp point.
  void rollback(std::size_t to_pos);

  std::size_t kept_len() const noexcept { return trace_.kept.size(); }
  const DecodeTrace& trace() const noexcept { return trace_; }
  const Controller& controller() const noexcept { return controller_; }
  const KVCacheLedger& ledger() const noexcept { return ledger_; }
  BackendSession& backend_session() noexcept { return *session_; }

  /// Closes the backend session and returns the finished trace.
  DecodeTrace finish();

 private:
  void stop(BudgetKind kind);
  void push_event(std::uint64_t seq, EventBody body) { trace_.events.push_back({seq, body}); }

  EngineConfig cfg_;
  std::size_t prompt_len_;
  std::unique_ptr<BackendSession> session_;
  Controller controller_;
  KVCacheLedger ledger_;
  std::mt19937_64 rng_;
  DecodeTrace trace_;
  Mode cache_mode_ = Mode::concise;
  std::size_t clamp_left_ = 0;
  std::uint64_t next_seq_ = 0;
  bool finished_ = false;
};

/// Runs a full decode. The trace ends with exactly one eos or budget_stop.
/// Backend failures surface as BackendError carrying the session id.
DecodeTrace decode(std::span<const TokenId> prompt, const ModelBackend& backend,
                   const EngineConfig& cfg);

struct EpisodeResult {
  DecodeTrace trace;
  bool correct = false;
  std::size_t kept_tokens = 0;
  std::size_t compute_tokens = 0;
  double thinking_coverage = 0.0;
  /// Ledger overhead at the default prefill discount.
  double overhead_ratio = 0.0;
};

EpisodeResult evaluate(DecodeTrace trace, bool correct);

/// Decodes the backend's task from its default prompt and grades the result.
EpisodeResult run_episode(const ScriptedBackend& backend, const EngineConfig& cfg);

}  // namespace mixdecode
