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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mixdecode/types.hpp"

namespace mixdecode {

/// Per-mode KV-cache bookkeeping for one decode session.
///
/// Each mode owns a cached prefix length (prompt + completion tokens whose
/// attention states are valid under that mode's adapter strength). Switching
/// into a mode prefills the gap between its cache and the current prefix;
/// rollback truncates both caches. With a shared cache (adapter that leaves
/// attention k/v untouched) both entries move together and switches are free.
///
/// The concise cache starts at the prompt length: prompt processing is the
/// baseline cost of any decode and is not logged as switch overhead.
class KVCacheLedger {
 public:
  static constexpr double kDefaultPrefillDiscount = 0.05;

  struct PrefillRecord {
    Mode mode;
    std::size_t n_tokens;
  };

  KVCacheLedger(std::size_t prompt_len, bool shared);

  /// Seeds `to_mode`'s cache up to `current_prefix_len` and returns the number
  /// of prefilled tokens (0 when shared). Throws LogicError if the cache is
  /// longer than the prefix; call truncate first.
  std::size_t on_switch(Mode to_mode, std::size_t current_prefix_len);

  /// Decoding `n` tokens in `active_mode` extends its cache (both when shared).
  void on_generate(Mode active_mode, std::size_t n);

  /// Rollback: cache_len[m] = min(cache_len[m], new_prefix_len) for both modes.
  /// Throws LogicError if new_prefix_len < prompt_len.
  void truncate(std::size_t new_prefix_len);

  /// Discounted prefill share: d*P / (d*P + compute_tokens), P = total prefill.
  /// Throws ConfigError unless compute_tokens > 0 and d in (0, 1].
  double overhead_ratio(std::size_t compute_tokens,
                        double discount = kDefaultPrefillDiscount) const;

  std::size_t cache_len(Mode mode) const noexcept { return cache_[index(mode)]; }
  std::size_t prompt_len() const noexcept { return prompt_len_; }
  bool shared() const noexcept { return shared_; }
  std::span<const PrefillRecord> prefill_log() const noexcept { return log_; }
  std::size_t switches() const noexcept { return log_.size(); }
  std::size_t total_prefill_tokens() const noexcept;

  /// What the switches would have cost had each mode's cache been dropped when
  /// the decode left that mode: the full prefix at every switch.
  std::size_t prefill_if_evicted() const noexcept { return evicted_total_; }

  LedgerSummary summary() const;

 private:
  static constexpr std::size_t index(Mode m) noexcept { return m == Mode::thinking ? 1 : 0; }

  std::size_t prompt_len_;
  bool shared_;
  std::array<std::size_t, 2> cache_{};
  std::vector<PrefillRecord> log_;
  std::size_t evicted_total_ = 0;
};

/// Ratio helper shared with the metrics module.
double overhead_ratio(std::size_t prefill_tokens, std::size_t compute_tokens,
                      double discount = KVCacheLedger::kDefaultPrefillDiscount);

}  // namespace mixdecode
