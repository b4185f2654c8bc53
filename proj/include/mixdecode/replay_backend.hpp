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
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "mixdecode/backend.hpp"

namespace mixdecode {

/// Plays back a recorded entropy sequence by completion position. Tokens are
/// placeholders, there is no feedback from regeneration (a rolled-back
/// position re-reads the same value), and the trace ends with eos.
class ReplayBackend : public ModelBackend {
 public:
  static constexpr TokenId kEos = 0;
  static constexpr TokenId kPlaceholder = 1;
  static constexpr std::size_t kVocabSize = 2;

  /// Throws ConfigError if any entropy lies outside [0, 1].
  explicit ReplayBackend(std::vector<double> entropies, bool kv_invariant_adapter = false);

  std::unique_ptr<BackendSession> open_session(const std::string& session_id,
                                               std::span<const TokenId> prompt,
                                               double alpha) const override;
  std::string describe() const override { return "replay"; }

  std::span<const double> entropies() const noexcept { return entropies_; }
  const Capabilities& capabilities() const noexcept { return caps_; }

 private:
  std::vector<double> entropies_;
  Capabilities caps_;
};

/// Cursor-level read: the recorded entropy at `cursor`, or nullopt past the end.
std::optional<double> replay_step(std::span<const double> entropies, std::size_t cursor);

/// Reads an entropy sequence: either a trace written by write_trace (the kept
/// entropies are used) or plain text with one value per line ('#' comments).
std::vector<double> load_entropy_sequence(std::istream& in);

}  // namespace mixdecode
