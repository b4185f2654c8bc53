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

#include "mixdecode/protocol.hpp"

#include <limits>

#include <json.hpp>

namespace mixdecode::protocol {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json base(std::string_view op, std::string_view session) {
  ordered_json j;
  j["op"] = op;
  j["session"] = session;
  return j;
}

// Parses a reply and throws unless it is an object with "ok": true.
json expect_ok(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ProtocolError("malformed", "response is not a JSON object: " + std::string(line));
  }
  const auto ok = j.find("ok");
  if (ok == j.end() || !ok->is_boolean()) {
    throw ProtocolError("malformed", "response lacks boolean 'ok'");
  }
  if (!ok->get<bool>()) {
    std::string code = "error";
    if (auto c = j.find("code"); c != j.end() && c->is_string()) code = c->get<std::string>();
    std::string message = "backend answered with error code '" + code + "'";
    if (auto m = j.find("message"); m != j.end() && m->is_string()) {
      message += ": " + m->get<std::string>();
    }
    throw ProtocolError(code, message);
  }
  return j;
}

bool bool_field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_boolean()) {
    throw ProtocolError("malformed", std::string("response lacks boolean '") + name + "'");
  }
  return it->get<bool>();
}

std::size_t count_field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) {
    throw ProtocolError("malformed",
                        std::string("response field '") + name + "' is not a non-negative integer");
  }
  return it->get<std::size_t>();
}

double number_field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_number()) {
    throw ProtocolError("malformed", std::string("response field '") + name + "' is not a number");
  }
  return it->get<double>();
}

}  // namespace

std::string init_request(std::string_view session) {
  ordered_json j = base("init", session);
  j["protocol"] = kVersion;
  return j.dump();
}

std::string prefill_request(std::string_view session, double alpha,
                            std::span<const TokenId> tokens) {
  ordered_json j = base("prefill", session);
  j["alpha"] = alpha;
  j["tokens"] = std::vector<TokenId>(tokens.begin(), tokens.end());
  return j.dump();
}

std::string step_request(std::string_view session, double alpha, double temperature,
                         std::uint64_t seed_draw) {
  ordered_json j = base("step", session);
  j["alpha"] = alpha;
  j["temperature"] = temperature;
  j["seed_draw"] = seed_draw;
  return j.dump();
}

std::string rollback_request(std::string_view session, std::size_t to_len) {
  ordered_json j = base("rollback", session);
  j["to_len"] = to_len;
  return j.dump();
}

std::string close_request(std::string_view session) { return base("close", session).dump(); }

InitReply parse_init_reply(std::string_view line) {
  const json j = expect_ok(line);
  if (auto p = j.find("protocol"); p != j.end() && (!p->is_number_integer() || *p != kVersion)) {
    throw ProtocolError("protocol_version", "backend speaks protocol " + p->dump() +
                                                ", expected " + std::to_string(kVersion));
  }
  const auto caps = j.find("capabilities");
  if (caps == j.end() || !caps->is_object()) {
    throw ProtocolError("malformed", "init response lacks 'capabilities'");
  }
  InitReply r;
  r.capabilities.emits_full_dist = bool_field(*caps, "emits_full_dist");
  r.capabilities.kv_invariant_adapter = bool_field(*caps, "kv_invariant_adapter");
  r.capabilities.concurrent_sessions = bool_field(*caps, "concurrent_sessions");
  r.vocab_size = count_field(j, "vocab_size");
  if (r.vocab_size < 2) throw ProtocolError("malformed", "vocab_size must be at least 2");
  return r;
}

std::size_t parse_prefill_reply(std::string_view line) {
  return count_field(expect_ok(line), "cached_len");
}

StepReply parse_step_reply(std::string_view line) {
  const json j = expect_ok(line);
  StepReply r;
  const std::size_t token = count_field(j, "token");
  if (token > std::numeric_limits<TokenId>::max()) {
    throw ProtocolError("malformed", "token id out of range");
  }
  r.token = static_cast<TokenId>(token);
  r.entropy = number_field(j, "entropy");
  r.logprob = number_field(j, "logprob");
  r.eos = bool_field(j, "eos");
  return r;
}

void parse_rollback_reply(std::string_view line) { expect_ok(line); }

void parse_close_reply(std::string_view line) { expect_ok(line); }

}  // namespace mixdecode::protocol
