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
#include <optional>
#include <span>
#include <string>

#include "mixdecode/types.hpp"

namespace mixdecode {

struct Capabilities {
  bool emits_full_dist = true;
  /// Adapter leaves attention k/v untouched, so both modes share one cache.
  bool kv_invariant_adapter = false;
  bool concurrent_sessions = true;

  friend bool operator==(const Capabilities&, const Capabilities&) = default;
};

struct StepResult {
  TokenId token = 0;
  bool eos = false;
  /// Normalized entropy of the model distribution the token was drawn from.
  double entropy = 0.0;
  double logprob = 0.0;
  /// Present when the backend emits full distributions; the engine then
  /// computes the entropy itself.
  std::optional<NextTokenDistribution> dist;
};

/// One autoregressive sequence held by a backend. Lengths count prompt and
/// completion tokens together.
class BackendSession {
 public:
  virtual ~BackendSession() = default;

  virtual const Capabilities& capabilities() const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual std::size_t length() const = 0;

  /// Samples the next token under adapter strength `alpha`. A non-eos token is
  /// appended to the sequence; an eos token is not.
  virtual StepResult step(double alpha, double temperature, std::uint64_t seed_draw) = 0;

  /// Truncates the sequence to `to_len` tokens.
  virtual void rollback(std::size_t to_len) = 0;

  virtual void close() {}
};

/// Factory for sessions. Implementations must be safe to call from several
/// threads when they report concurrent_sessions.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  /// Opens a session whose sequence starts as `prompt`, prefilled under `alpha`.
  virtual std::unique_ptr<BackendSession> open_session(const std::string& session_id,
                                                       std::span<const TokenId> prompt,
                                                       double alpha) const = 0;

  /// Short human-readable identity, e.g. "scripted:S1".
  virtual std::string describe() const = 0;
};

}  // namespace mixdecode
