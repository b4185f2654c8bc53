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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mixdecode/backend.hpp"

// Line-delimited JSON messages exchanged with external model backends. One
// request, one response, in order, per session. Field names are part of the
// contract; unknown fields are ignored. See docs/protocol.md.
namespace mixdecode::protocol {

inline constexpr int kVersion = 1;

/// Malformed or negative response. `code` is the server's error code when it
/// sent one ("bad_rollback", ...) and "malformed" for unparseable replies.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

std::string init_request(std::string_view session);
std::string prefill_request(std::string_view session, double alpha,
                            std::span<const TokenId> tokens);
std::string step_request(std::string_view session, double alpha, double temperature,
                         std::uint64_t seed_draw);
std::string rollback_request(std::string_view session, std::size_t to_len);
std::string close_request(std::string_view session);

struct InitReply {
  Capabilities capabilities;
  std::size_t vocab_size = 0;
};

struct StepReply {
  TokenId token = 0;
  double entropy = 0.0;
  double logprob = 0.0;
  bool eos = false;
};

InitReply parse_init_reply(std::string_view line);
std::size_t parse_prefill_reply(std::string_view line);
StepReply parse_step_reply(std::string_view line);
void parse_rollback_reply(std::string_view line);
void parse_close_reply(std::string_view line);

}  // namespace mixdecode::protocol
