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

#include "mixdecode/cli.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mixdecode/remote_backend.hpp"
#include "mixdecode/replay_backend.hpp"
#include "mixdecode/trace_io.hpp"

namespace mixdecode {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt(double v) { return format_number(v); }

/// Options shared by every subcommand. Threshold and window flags accept
/// comma-separated lists; only `sweep` may pass more than one value.
struct Options {
  std::string backend;
  std::vector<double> tau_up;
  std::vector<double> tau_down{0.3};
  std::vector<std::size_t> back{1};
  std::vector<std::size_t> fwd{8};
  double alpha_low = 0.0;
  double alpha_high = 1.0;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_kept = 4096;
  std::size_t max_compute = 16384;
  std::size_t episodes = 1;
  std::size_t jobs = 1;
  std::string trace_out;
  std::string summary_out;
  bool kv_invariant = false;
};

void add_common(CLI::App& app, Options& o, bool grid) {
  const char* list_note = grid ? " (comma-separated list)" : "";
  app.add_option("--backend", o.backend,
                 "scripted:<scenario> | replay:<file> | remote:<command or tcp://host:port>")
      ->required();
  app.add_option("--tau-up", o.tau_up, std::string("trigger threshold") + list_note)
      ->required()
      ->delimiter(',');
  app.add_option("--tau-down", o.tau_down, std::string("anneal threshold") + list_note)
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("-B,--back", o.back, std::string("look-back tokens") + list_note)
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("-F,--fwd", o.fwd, std::string("look-ahead tokens") + list_note)
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--alpha-low", o.alpha_low, "adapter strength in thinking mode")
      ->capture_default_str();
  app.add_option("--alpha-high", o.alpha_high, "adapter strength in concise mode")
      ->capture_default_str();
  app.add_option("--temperature", o.temperature, "sampling temperature, 0 = greedy")
      ->capture_default_str();
  app.add_option("--seed", o.seed, "RNG seed (default: $MIXDECODE_SEED or 0)");
  app.add_option("--max-kept", o.max_kept, "kept-token budget")->capture_default_str();
  app.add_option("--max-compute", o.max_compute, "kept+discarded token budget")
      ->capture_default_str();
  app.add_flag("--kv-invariant", o.kv_invariant,
               "adapter leaves k/v untouched (shared cache; scripted and replay backends)");
  app.add_option("--summary-out", o.summary_out, "write the CSV summary table here");
}

EngineConfig engine_config(const Options& o, double tau_up, double tau_down, std::size_t back,
                           std::size_t fwd) {
  EngineConfig cfg{.controller = ControllerConfig(tau_up, tau_down, back, fwd, o.alpha_low, o.alpha_high),
                   .session_id = {}};
  cfg.max_kept_tokens = o.max_kept;
  cfg.max_compute_tokens = o.max_compute;
  cfg.temperature = o.temperature;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

template <typename T>
T single(const std::vector<T>& values, const char* flag) {
  if (values.size() != 1) {
    throw UsageError(std::string(flag) + " takes a single value outside of sweep");
  }
  return values.front();
}

EngineConfig single_config(const Options& o) {
  return engine_config(o, single(o.tau_up, "--tau-up"), single(o.tau_down, "--tau-down"),
                       single(o.back, "-B"), single(o.fwd, "-F"));
}

BackendHandle backend_for(const Options& o) {
  return make_backend(o.backend, {o.alpha_low, o.alpha_high, o.kv_invariant});
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << content;
  if (!f.flush()) throw ConfigError("cannot write '" + path + "'");
}

std::string summary_csv(std::span<const SweepResult> results) {
  std::ostringstream s;
  write_summary_csv(s, pareto_table(results));
  return s.str();
}

std::string mode_string(const DecodeTrace& trace) {
  std::string s;
  s.reserve(trace.kept.size());
  for (const auto& k : trace.kept) s.push_back(k.mode == Mode::thinking ? 'T' : 'C');
  return s;
}

std::string summary_line(const EpisodeResult& r, bool graded) {
  const DecodeTrace& t = r.trace;
  std::ostringstream s;
  s << "correct=" << (graded ? (r.correct ? "1" : "0") : "na") << " kept=" << r.kept_tokens
    << " compute=" << r.compute_tokens << " coverage=" << fmt(r.thinking_coverage)
    << " triggers=" << t.trigger_count() << " switches=" << t.ledger.switches
    << " prefill=" << t.ledger.total_prefill_tokens << " overhead=" << fmt(r.overhead_ratio)
    << " end=" << (t.ended_by_eos() ? "eos" : "budget");
  return s.str();
}

int cmd_run(const Options& o, std::ostream& out, bool show_modes) {
  const EngineConfig cfg = single_config(o);
  const BackendHandle handle = backend_for(o);
  const EpisodeResult r = run_one(handle, cfg);
  if (!o.trace_out.empty()) {
    std::ostringstream s;
    write_trace(s, r.trace);
    write_file(o.trace_out, s.str());
  }
  if (!o.summary_out.empty()) {
    const SweepResult agg = aggregate(std::span(&r, 1), ConfigPoint::from(cfg.controller));
    write_file(o.summary_out, summary_csv(std::span(&agg, 1)));
  }
  out << summary_line(r, handle.scripted != nullptr) << '\n';
  if (show_modes) out << "modes=" << mode_string(r.trace) << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (o.episodes == 0) throw UsageError("--episodes must be at least 1");
  std::vector<EngineConfig> points;
  for (double up : o.tau_up) {
    for (double down : o.tau_down) {
      for (std::size_t b : o.back) {
        for (std::size_t f : o.fwd) {
          EngineConfig cfg = engine_config(o, up, down, b, f);
          cfg.seed = point_seed(o.seed, ConfigPoint::from(cfg.controller));
          points.push_back(std::move(cfg));
        }
      }
    }
  }
  const BackendHandle handle = backend_for(o);
  std::vector<SweepResult> results(points.size());

  // Workers claim points by index; each result lands in its own slot, so the
  // output order does not depend on scheduling.
  std::size_t next = 0;
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (failure || next == points.size()) return;
        i = next++;
      }
      try {
        results[i] = run_point(handle, points[i], o.episodes);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(o.jobs, 1, points.size());
  std::vector<std::jthread> threads;
  for (std::size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  threads.clear();
  if (failure) std::rethrow_exception(failure);

  const std::string csv = summary_csv(results);
  if (o.summary_out.empty()) {
    out << csv;
  } else {
    write_file(o.summary_out, csv);
    out << "wrote " << results.size() << " rows\n";
  }
  return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
  if (o.episodes == 0) throw UsageError("--episodes must be at least 1");
  const EngineConfig base = single_config(o);
  const BackendHandle handle = backend_for(o);
  std::size_t switches = 0, prefill = 0, evicted = 0, compute = 0, kept = 0;
  bool shared = false;
  for (std::size_t i = 0; i < o.episodes; ++i) {
    EngineConfig cfg = base;
    cfg.seed = base.seed + i;
    const EpisodeResult r = run_one(handle, cfg);
    switches += r.trace.ledger.switches;
    prefill += r.trace.ledger.total_prefill_tokens;
    evicted += r.trace.ledger.prefill_if_evicted;
    compute += r.compute_tokens;
    kept += r.kept_tokens;
    shared = r.trace.ledger.shared_cache;
  }
  auto ratio = [&](std::size_t p, double d) { return compute ? overhead_ratio(p, compute, d) : 0.0; };
  out << "episodes=" << o.episodes << " shared_cache=" << (shared ? 1 : 0)
      << " switches=" << switches << " prefill_tokens=" << prefill
      << " prefill_if_evicted=" << evicted << " compute_tokens=" << compute
      << " kept_tokens=" << kept << '\n';
  out << "overhead_ratio d=1 " << fmt(ratio(prefill, 1.0)) << '\n';
  out << "overhead_ratio d=0.05 " << fmt(ratio(prefill, 0.05)) << '\n';
  out << "overhead_ratio_if_evicted d=1 " << fmt(ratio(evicted, 1.0)) << '\n';
  out << "overhead_ratio_if_evicted d=0.05 " << fmt(ratio(evicted, 0.05)) << '\n';
  return kExitOk;
}

std::uint64_t env_seed() {
  const char* v = std::getenv("MIXDECODE_SEED");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (errno != 0 || *end != '\0' || *v == '-') {
    throw UsageError(std::string("MIXDECODE_SEED is not an unsigned integer: '") + v + "'");
  }
  return s;
}

}  // namespace

BackendHandle make_backend(std::string_view selector, const BackendOptions& options) {
  const auto colon = selector.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("backend selector must be scripted:<scenario>, replay:<file> or remote:<target>");
  }
  const std::string_view kind = selector.substr(0, colon);
  const std::string arg(selector.substr(colon + 1));
  BackendHandle h;
  if (kind == "scripted") {
    ScriptedBackend::Options opt;
    opt.alpha_low = options.alpha_low;
    opt.alpha_high = options.alpha_high;
    opt.kv_invariant_adapter = options.kv_invariant_adapter;
    opt.name = arg;
    auto backend = std::make_unique<ScriptedBackend>(scenario(arg), opt);
    h.prompt = backend->prompt();
    h.scripted = backend.get();
    h.backend = std::move(backend);
  } else if (kind == "replay") {
    std::ifstream f(arg);
    if (!f) throw ConfigError("cannot open replay file '" + arg + "'");
    h.backend = std::make_unique<ReplayBackend>(load_entropy_sequence(f), options.kv_invariant_adapter);
    h.prompt = {ReplayBackend::kPlaceholder};
  } else if (kind == "remote") {
    h.backend = std::make_unique<RemoteBackend>(RemoteEndpoint::parse(arg));
    h.prompt.assign(8, toy_vocab::kPrompt);
  } else {
    throw ConfigError("unknown backend kind '" + std::string(kind) + "'");
  }
  return h;
}

EpisodeResult run_one(const BackendHandle& handle, const EngineConfig& cfg) {
  if (handle.scripted != nullptr) return run_episode(*handle.scripted, cfg);
  return evaluate(decode(handle.prompt, *handle.backend, cfg), false);
}

std::uint64_t point_seed(std::uint64_t seed, const ConfigPoint& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, std::bit_cast<std::uint64_t>(p.tau_up));
  h = fnv1a(h, std::bit_cast<std::uint64_t>(p.tau_down));
  h = fnv1a(h, p.back);
  h = fnv1a(h, p.fwd);
  h = fnv1a(h, std::bit_cast<std::uint64_t>(p.alpha_low));
  h = fnv1a(h, std::bit_cast<std::uint64_t>(p.alpha_high));
  return seed ^ h;
}

SweepResult run_point(const BackendHandle& handle, const EngineConfig& base, std::size_t episodes) {
  std::vector<EpisodeResult> results;
  results.reserve(episodes);
  for (std::size_t i = 0; i < episodes; ++i) {
    EngineConfig cfg = base;
    cfg.seed = base.seed + i;
    EpisodeResult r = run_one(handle, cfg);
    r.trace = {};  // only the aggregates are needed
    results.push_back(std::move(r));
  }
  return aggregate(results, ConfigPoint::from(base.controller));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy-gated mixed-mode decoding controller", "mixdecode"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mixdecode 0.1.0");

  Options o;
  bool seed_given = false;
  auto* run = app.add_subcommand("run", "decode one episode and print a one-line summary");
  add_common(*run, o, false);
  run->add_option("--trace-out", o.trace_out, "write the trace here");

  auto* sweep = app.add_subcommand("sweep", "grid over tau-up, tau-down, B, F; CSV summary");
  add_common(*sweep, o, true);
  sweep->add_option("--episodes", o.episodes, "episodes per grid point")->capture_default_str();
  sweep->add_option("--jobs", o.jobs, "parallel workers")->capture_default_str();

  std::string replay_file;
  auto* replay = app.add_subcommand("replay", "run the controller over a recorded entropy sequence");
  replay->add_option("file", replay_file, "entropy sequence or trace file")->required();
  add_common(*replay, o, false);
  replay->get_option("--backend")->required(false);
  replay->add_option("--trace-out", o.trace_out, "write the trace here");

  auto* bench = app.add_subcommand("bench", "KV-cache switch and prefill totals");
  add_common(*bench, o, false);
  bench->add_option("--episodes", o.episodes, "episodes to accumulate")->capture_default_str();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "mixdecode 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  }
  for (auto* sub : {run, sweep, replay, bench}) {
    if (sub->parsed()) seed_given = sub->count("--seed") > 0;
  }

  try {
    if (!seed_given) o.seed = env_seed();
    if (replay->parsed()) {
      if (!o.backend.empty()) throw UsageError("replay takes its file as an argument, not --backend");
      o.backend = "replay:" + replay_file;
      return cmd_run(o, out, true);
    }
    if (run->parsed()) return cmd_run(o, out, false);
    if (sweep->parsed()) return cmd_sweep(o, out);
    return cmd_bench(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BackendError& e) {
    err << "backend error (session " << e.session() << "): " << e.what() << '\n';
    return kExitBackend;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mixdecode
