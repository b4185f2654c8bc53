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

#include "mixdecode/kv_ledger.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mixdecode {

KVCacheLedger::KVCacheLedger(std::size_t prompt_len, bool shared)
    : prompt_len_(prompt_len), shared_(shared) {
  cache_[index(Mode::concise)] = prompt_len;
  cache_[index(Mode::thinking)] = shared ? prompt_len : 0;
}

std::size_t KVCacheLedger::on_switch(Mode to_mode, std::size_t current_prefix_len) {
  std::size_t& cached = cache_[index(to_mode)];
  if (current_prefix_len < cached) {
    throw LogicError("switch to " + std::string(to_string(to_mode)) + " with prefix " +
                     std::to_string(current_prefix_len) + " below cached length " +
                     std::to_string(cached) + "; truncate first");
  }
  const std::size_t cost = shared_ ? 0 : current_prefix_len - cached;
  cached = current_prefix_len;
  if (shared_) cache_.fill(current_prefix_len);
  evicted_total_ += shared_ ? 0 : current_prefix_len;
  log_.push_back({to_mode, cost});
  return cost;
}

void KVCacheLedger::on_generate(Mode active_mode, std::size_t n) {
  if (shared_) {
    for (auto& c : cache_) c += n;
  } else {
    cache_[index(active_mode)] += n;
  }
}

void KVCacheLedger::truncate(std::size_t new_prefix_len) {
  if (new_prefix_len < prompt_len_) {
    throw LogicError("truncate to " + std::to_string(new_prefix_len) + " would cut into the prompt");
  }
  for (auto& c : cache_) c = std::min(c, new_prefix_len);
}

std::size_t KVCacheLedger::total_prefill_tokens() const noexcept {
  return std::accumulate(log_.begin(), log_.end(), std::size_t{0},
                         [](std::size_t acc, const PrefillRecord& r) { return acc + r.n_tokens; });
}

double KVCacheLedger::overhead_ratio(std::size_t compute_tokens, double discount) const {
  return mixdecode::overhead_ratio(total_prefill_tokens(), compute_tokens, discount);
}

LedgerSummary KVCacheLedger::summary() const {
  return LedgerSummary{switches(), total_prefill_tokens(), evicted_total_, shared_};
}

double overhead_ratio(std::size_t prefill_tokens, std::size_t compute_tokens, double discount) {
  if (compute_tokens == 0) {
    throw ConfigError("overhead ratio needs compute_tokens > 0");
  }
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw ConfigError("prefill discount must lie in (0, 1]");
  }
  const double prefill = discount * static_cast<double>(prefill_tokens);
  return prefill / (prefill + static_cast<double>(compute_tokens));
}

}  // namespace mixdecode
