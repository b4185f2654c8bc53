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

#include "mixdecode/trace_io.hpp"

#include <algorithm>
#include <string>

#include <json.hpp>

#include "mixdecode/kv_ledger.hpp"

namespace mixdecode {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kTraceTag = "mixdecode";
constexpr int kTraceVersion = 1;

struct EventWriter {
  ordered_json& j;

  void operator()(const event::Trigger& e) const {
    j["event"] = "trigger";
    j["pos"] = e.pos;
    j["entropy"] = e.entropy;
    j["token"] = e.token;
    j["mode"] = to_string(e.mode);
  }
  void operator()(const event::WindowOpen& e) const {
    j["event"] = "window_open";
    j["left"] = e.left;
    j["right"] = e.right;
  }
  void operator()(const event::WindowExtend& e) const {
    j["event"] = "window_extend";
    j["pos"] = e.pos;
    j["right"] = e.right;
  }
  void operator()(const event::WindowClose& e) const {
    j["event"] = "window_close";
    j["pos"] = e.pos;
    j["reason"] = to_string(e.reason);
  }
  void operator()(const event::Anneal& e) const {
    j["event"] = "anneal";
    j["pos"] = e.pos;
  }
  void operator()(const event::Eos& e) const {
    j["event"] = "eos";
    j["pos"] = e.pos;
    j["mode"] = to_string(e.mode);
    j["entropy"] = e.entropy;
  }
  void operator()(const event::BudgetStop& e) const {
    j["event"] = "budget_stop";
    j["pos"] = e.pos;
    j["kind"] = to_string(e.kind);
  }
  void operator()(const event::Prefill& e) const {
    j["event"] = "prefill";
    j["mode"] = to_string(e.mode);
    j["n_tokens"] = e.n_tokens;
  }
};

CloseReason parse_close_reason(const std::string& s) {
  if (s == "end") return CloseReason::end;
  if (s == "eos") return CloseReason::eos;
  if (s == "budget") return CloseReason::budget;
  throw ConfigError("unknown window_close reason '" + s + "'");
}

BudgetKind parse_budget_kind(const std::string& s) {
  if (s == "kept") return BudgetKind::kept;
  if (s == "compute") return BudgetKind::compute;
  throw ConfigError("unknown budget kind '" + s + "'");
}

EventBody parse_event(const ordered_json& j) {
  const std::string name = j.at("event").get<std::string>();
  if (name == "trigger") {
    return event::Trigger{j.at("pos").get<std::size_t>(), j.at("entropy").get<double>(),
                          j.at("token").get<TokenId>(),
                          parse_mode(j.at("mode").get<std::string>())};
  }
  if (name == "window_open") {
    return event::WindowOpen{j.at("left").get<std::size_t>(), j.at("right").get<std::size_t>()};
  }
  if (name == "window_extend") {
    return event::WindowExtend{j.at("pos").get<std::size_t>(), j.at("right").get<std::size_t>()};
  }
  if (name == "window_close") {
    return event::WindowClose{j.at("pos").get<std::size_t>(),
                              parse_close_reason(j.at("reason").get<std::string>())};
  }
  if (name == "anneal") return event::Anneal{j.at("pos").get<std::size_t>()};
  if (name == "eos") {
    return event::Eos{j.at("pos").get<std::size_t>(), parse_mode(j.at("mode").get<std::string>()),
                      j.at("entropy").get<double>()};
  }
  if (name == "budget_stop") {
    return event::BudgetStop{j.at("pos").get<std::size_t>(),
                             parse_budget_kind(j.at("kind").get<std::string>())};
  }
  if (name == "prefill") {
    return event::Prefill{parse_mode(j.at("mode").get<std::string>()),
                          j.at("n_tokens").get<std::size_t>()};
  }
  throw ConfigError("unknown trace event '" + name + "'");
}

}  // namespace

void write_trace(std::ostream& out, const DecodeTrace& trace) {
  ordered_json header;
  header["trace"] = kTraceTag;
  header["version"] = kTraceVersion;
  header["prompt_len"] = trace.prompt_len;
  header["vocab_size"] = trace.vocab_size;
  out << header.dump() << '\n';

  for (const auto& k : trace.kept) {
    ordered_json j;
    j["pos"] = k.pos;
    j["token"] = k.token;
    j["mode"] = to_string(k.mode);
    j["entropy"] = k.entropy;
    j["alpha"] = k.alpha;
    j["seq"] = k.seq;
    out << j.dump() << '\n';
  }
  for (const auto& d : trace.discarded) {
    ordered_json inner;
    inner["pos"] = d.pos;
    inner["token"] = d.token;
    inner["mode"] = to_string(d.mode);
    inner["entropy"] = d.entropy;
    inner["seq"] = d.seq;
    ordered_json j;
    j["discarded"] = std::move(inner);
    out << j.dump() << '\n';
  }
  for (const auto& e : trace.events) {
    ordered_json j;
    j["event"] = nullptr;  // reserve the first key
    j["seq"] = e.seq;
    std::visit(EventWriter{j}, e.body);
    out << j.dump() << '\n';
  }

  const std::size_t compute = trace.compute_tokens;
  ordered_json s;
  s["kept"] = trace.kept.size();
  s["discarded"] = trace.discarded.size();
  s["compute_tokens"] = compute;
  s["probe_steps"] = trace.probe_steps;
  s["triggers"] = trace.trigger_count();
  s["thinking_tokens"] = trace.thinking_tokens();
  s["coverage"] = trace.thinking_coverage();
  s["switches"] = trace.ledger.switches;
  s["total_prefill_tokens"] = trace.ledger.total_prefill_tokens;
  s["prefill_if_evicted"] = trace.ledger.prefill_if_evicted;
  s["shared_cache"] = trace.ledger.shared_cache;
  s["overhead_ratio"] =
      compute > 0 ? overhead_ratio(trace.ledger.total_prefill_tokens, compute) : 0.0;
  s["overhead_ratio_raw"] =
      compute > 0 ? overhead_ratio(trace.ledger.total_prefill_tokens, compute, 1.0) : 0.0;
  ordered_json summary;
  summary["summary"] = std::move(s);
  out << summary.dump() << '\n';
}

bool looks_like_trace(std::string_view text) {
  const auto nl = text.find('\n');
  const std::string first(text.substr(0, nl));
  const auto j = ordered_json::parse(first, nullptr, false);
  return !j.is_discarded() && j.is_object() && j.contains("trace") &&
         j["trace"] == std::string(kTraceTag);
}

DecodeTrace read_trace(std::istream& in) {
  DecodeTrace trace;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const ordered_json j = ordered_json::parse(line);
      if (!have_header) {
        if (!j.contains("trace") || j["trace"] != std::string(kTraceTag)) {
          throw ConfigError("missing trace header");
        }
        if (j.at("version").get<int>() != kTraceVersion) {
          throw ConfigError("unsupported trace version");
        }
        trace.prompt_len = j.at("prompt_len").get<std::size_t>();
        trace.vocab_size = j.at("vocab_size").get<std::size_t>();
        have_header = true;
      } else if (j.contains("event")) {
        trace.events.push_back({j.at("seq").get<std::uint64_t>(), parse_event(j)});
      } else if (j.contains("discarded")) {
        const auto& d = j["discarded"];
        trace.discarded.push_back({d.at("pos").get<std::size_t>(), d.at("token").get<TokenId>(),
                                   parse_mode(d.at("mode").get<std::string>()),
                                   d.at("entropy").get<double>(), d.at("seq").get<std::uint64_t>()});
      } else if (j.contains("summary")) {
        const auto& s = j["summary"];
        trace.compute_tokens = s.at("compute_tokens").get<std::size_t>();
        trace.probe_steps = s.at("probe_steps").get<std::size_t>();
        trace.ledger.switches = s.at("switches").get<std::size_t>();
        trace.ledger.total_prefill_tokens = s.at("total_prefill_tokens").get<std::size_t>();
        trace.ledger.prefill_if_evicted = s.at("prefill_if_evicted").get<std::size_t>();
        trace.ledger.shared_cache = s.at("shared_cache").get<bool>();
      } else {
        trace.kept.push_back({j.at("pos").get<std::size_t>(), j.at("token").get<TokenId>(),
                              parse_mode(j.at("mode").get<std::string>()),
                              j.at("entropy").get<double>(), j.at("alpha").get<double>(),
                              j.at("seq").get<std::uint64_t>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("trace line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!have_header) throw ConfigError("empty trace");
  return trace;
}

std::vector<ForwardStep> forward_journal(const DecodeTrace& trace) {
  using Kind = ForwardStep::Kind;
  std::vector<ForwardStep> steps;
  steps.reserve(trace.kept.size() + trace.discarded.size() + trace.probe_steps + 1);
  for (const auto& k : trace.kept) steps.push_back({k.seq, k.pos, k.mode, k.entropy, Kind::kept});
  for (const auto& d : trace.discarded) {
    steps.push_back({d.seq, d.pos, d.mode, d.entropy, Kind::discarded});
  }
  for (const auto& e : trace.events) {
    if (const auto* t = std::get_if<event::Trigger>(&e.body)) {
      steps.push_back({e.seq, t->pos, t->mode, t->entropy, Kind::probe});
    } else if (const auto* eos = std::get_if<event::Eos>(&e.body)) {
      steps.push_back({e.seq, eos->pos, eos->mode, eos->entropy, Kind::eos});
    }
  }
  std::sort(steps.begin(), steps.end(),
            [](const ForwardStep& a, const ForwardStep& b) { return a.seq < b.seq; });
  return steps;
}

}  // namespace mixdecode
