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

#include "mixdecode/stub_bridge.hpp"

#include <cmath>
#include <vector>

#include <json.hpp>

#include "mixdecode/protocol.hpp"

namespace mixdecode {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct RequestError {
  std::string code;
  std::string message;
};

std::string error_reply(const RequestError& e) {
  ordered_json j;
  j["ok"] = false;
  j["code"] = e.code;
  j["message"] = e.message;
  return j.dump();
}

std::string ok_reply() {
  ordered_json j;
  j["ok"] = true;
  return j.dump();
}

double number_arg(const json& req, const char* name) {
  const auto it = req.find(name);
  if (it == req.end() || !it->is_number() || !std::isfinite(it->get<double>())) {
    throw RequestError{"bad_request", std::string("field '") + name + "' must be a finite number"};
  }
  return it->get<double>();
}

std::uint64_t unsigned_arg(const json& req, const char* name) {
  const auto it = req.find(name);
  if (it == req.end() || !it->is_number_unsigned()) {
    throw RequestError{"bad_request",
                       std::string("field '") + name + "' must be a non-negative integer"};
  }
  return it->get<std::uint64_t>();
}

}  // namespace

StubBridge::StubBridge(ScriptedBackend backend) : backend_(std::move(backend)) {}

std::string StubBridge::handle(std::string_view line) {
  try {
    const json req = json::parse(line, nullptr, false);
    if (req.is_discarded() || !req.is_object()) {
      throw RequestError{"bad_request", "request is not a JSON object"};
    }
    const auto op_it = req.find("op");
    const auto session_it = req.find("session");
    if (op_it == req.end() || !op_it->is_string()) {
      throw RequestError{"bad_request", "missing string field 'op'"};
    }
    if (session_it == req.end() || !session_it->is_string()) {
      throw RequestError{"bad_request", "missing string field 'session'"};
    }
    const std::string op = op_it->get<std::string>();
    const std::string id = session_it->get<std::string>();

    if (op == "init") {
      if (const auto p = req.find("protocol");
          p == req.end() || !p->is_number_integer() || *p != protocol::kVersion) {
        throw RequestError{"protocol_version",
                           "this server speaks protocol " + std::to_string(protocol::kVersion)};
      }
      sessions_[id] = Session{};
      const Capabilities& caps = backend_.capabilities();
      ordered_json j;
      j["ok"] = true;
      j["protocol"] = protocol::kVersion;
      j["capabilities"] = {{"emits_full_dist", false},
                           {"kv_invariant_adapter", caps.kv_invariant_adapter},
                           {"concurrent_sessions", caps.concurrent_sessions}};
      j["vocab_size"] = toy_vocab::kSize;
      return j.dump();
    }

    if (op != "prefill" && op != "step" && op != "rollback" && op != "close") {
      throw RequestError{"unknown_op", "unknown op '" + op + "'"};
    }
    const auto found = sessions_.find(id);
    if (found == sessions_.end()) {
      throw RequestError{"unknown_session", "no session '" + id + "'; send init first"};
    }
    Session& s = found->second;

    if (op == "close") {
      sessions_.erase(found);
      return ok_reply();
    }

    if (op == "prefill") {
      const double alpha = number_arg(req, "alpha");
      const auto tokens = req.find("tokens");
      if (tokens == req.end() || !tokens->is_array() || tokens->empty()) {
        throw RequestError{"bad_request", "field 'tokens' must be a non-empty array"};
      }
      std::vector<TokenId> prompt;
      prompt.reserve(tokens->size());
      for (const auto& t : *tokens) {
        if (!t.is_number_unsigned() || t.get<std::uint64_t>() >= toy_vocab::kSize) {
          throw RequestError{"bad_request", "prompt token outside the vocabulary"};
        }
        prompt.push_back(t.get<TokenId>());
      }
      s.backend = backend_.open_session(id, prompt, alpha);
      ordered_json j;
      j["ok"] = true;
      j["cached_len"] = s.backend->length();
      return j.dump();
    }

    if (!s.backend) throw RequestError{"bad_request", "session has no prefilled prompt"};

    if (op == "rollback") {
      const std::uint64_t to_len = unsigned_arg(req, "to_len");
      try {
        s.backend->rollback(to_len);
      } catch (const LogicError& e) {
        throw RequestError{"bad_rollback", e.what()};
      }
      return ok_reply();
    }

    // step
    const double alpha = number_arg(req, "alpha");
    const double temperature = number_arg(req, "temperature");
    if (temperature < 0.0) throw RequestError{"bad_request", "temperature must be non-negative"};
    const std::uint64_t draw = unsigned_arg(req, "seed_draw");
    const StepResult r = s.backend->step(alpha, temperature, draw);
    ordered_json j;
    j["ok"] = true;
    j["token"] = r.token;
    j["entropy"] = r.entropy;
    j["logprob"] = r.logprob;
    j["eos"] = r.eos;
    return j.dump();
  } catch (const RequestError& e) {
    return error_reply(e);
  } catch (const std::exception& e) {
    return error_reply({"bad_request", e.what()});
  }
}

void StubBridge::serve(std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << handle(line) << '\n' << std::flush;
  }
}

}  // namespace mixdecode
