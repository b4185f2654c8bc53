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

#include "mixdecode/replay_backend.hpp"

#include <sstream>

#include "mixdecode/trace_io.hpp"

namespace mixdecode {

namespace {

class ReplaySession : public BackendSession {
 public:
  ReplaySession(const ReplayBackend& backend, std::size_t prompt_len)
      : backend_(backend), prompt_len_(prompt_len) {}

  const Capabilities& capabilities() const override { return backend_.capabilities(); }
  std::size_t vocab_size() const override { return ReplayBackend::kVocabSize; }
  std::size_t length() const override { return prompt_len_ + cursor_; }

  StepResult step(double, double, std::uint64_t) override {
    StepResult r;
    const auto h = replay_step(backend_.entropies(), cursor_);
    if (!h) {
      r.token = ReplayBackend::kEos;
      r.eos = true;
      return r;
    }
    r.token = ReplayBackend::kPlaceholder;
    r.entropy = *h;
    ++cursor_;
    return r;
  }

  void rollback(std::size_t to_len) override {
    if (to_len < prompt_len_ || to_len > length()) {
      throw LogicError("replay rollback to " + std::to_string(to_len) + " out of range");
    }
    cursor_ = to_len - prompt_len_;
  }

 private:
  const ReplayBackend& backend_;
  std::size_t prompt_len_;
  std::size_t cursor_ = 0;
};

}  // namespace

ReplayBackend::ReplayBackend(std::vector<double> entropies, bool kv_invariant_adapter)
    : entropies_(std::move(entropies)), caps_{false, kv_invariant_adapter, true} {
  for (double h : entropies_) {
    if (!(h >= 0.0 && h <= 1.0)) throw ConfigError("replay entropies must lie in [0, 1]");
  }
}

std::unique_ptr<BackendSession> ReplayBackend::open_session(const std::string&,
                                                            std::span<const TokenId> prompt,
                                                            double) const {
  return std::make_unique<ReplaySession>(*this, prompt.size());
}

std::optional<double> replay_step(std::span<const double> entropies, std::size_t cursor) {
  if (cursor >= entropies.size()) return std::nullopt;
  return entropies[cursor];
}

std::vector<double> load_entropy_sequence(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (looks_like_trace(text)) {
    std::istringstream trace_in(text);
    const DecodeTrace trace = read_trace(trace_in);
    std::vector<double> out;
    out.reserve(trace.kept.size());
    for (const auto& k : trace.kept) out.push_back(k.entropy);
    return out;
  }
  std::vector<double> out;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream field(line.substr(0, line.find('#')));
    double h = 0.0;
    std::string rest;
    if (!(field >> h) || (field >> rest)) {
      throw ConfigError("entropy file line " + std::to_string(lineno) + ": expected one number");
    }
    out.push_back(h);
  }
  return out;
}

}  // namespace mixdecode
