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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "mixdecode/cli.hpp"
#include "mixdecode/controller.hpp"
#include "mixdecode/engine.hpp"
#include "mixdecode/entropy.hpp"
#include "mixdecode/replay_backend.hpp"
#include "mixdecode/scripted_backend.hpp"
#include "mixdecode/trace_io.hpp"

namespace py = pybind11;
using namespace mixdecode;

namespace {

EngineConfig engine_config(const ControllerConfig& controller, std::uint64_t seed,
                           double temperature, std::size_t max_kept, std::size_t max_compute) {
  EngineConfig cfg{.controller = controller, .session_id = {}};
  cfg.seed = seed;
  cfg.temperature = temperature;
  cfg.max_kept_tokens = max_kept;
  cfg.max_compute_tokens = max_compute;
  return cfg;
}

std::string mode_string(const DecodeTrace& trace) {
  std::string s;
  s.reserve(trace.kept.size());
  for (const auto& k : trace.kept) s.push_back(k.mode == Mode::thinking ? 'T' : 'C');
  return s;
}

std::string trace_jsonl(const DecodeTrace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entropy-gated decoding-mode controller";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidVocabularyError>(m, "InvalidVocabularyError", PyExc_ValueError);
  py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);
  py::register_exception<LogicError>(m, "LogicError", PyExc_AssertionError);

  py::enum_<Mode>(m, "Mode").value("concise", Mode::concise).value("thinking", Mode::thinking);

  py::enum_<WindowAction>(m, "WindowAction")
      .value("none", WindowAction::none)
      .value("open_window", WindowAction::open_window)
      .value("extend_window", WindowAction::extend_window)
      .value("close_window", WindowAction::close_window)
      .value("anneal", WindowAction::anneal);

  m.def("normalized_entropy",
        [](const std::vector<double>& probs) {
          return normalized_entropy(NextTokenDistribution(probs));
        },
        py::arg("probs"), "Shannon entropy divided by log |V|; probs must sum to 1.");

  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def(py::init<double, double, std::size_t, std::size_t, double, double>(),
           py::arg("tau_up"), py::arg("tau_down"), py::arg("back"), py::arg("fwd"),
           py::arg("alpha_low") = 0.0, py::arg("alpha_high") = 1.0)
      .def_static("pure_concise", &ControllerConfig::pure_concise, py::arg("alpha_low") = 0.0,
                  py::arg("alpha_high") = 1.0)
      .def_static("pure_thinking", &ControllerConfig::pure_thinking, py::arg("max_len"),
                  py::arg("alpha_low") = 0.0, py::arg("alpha_high") = 1.0)
      .def_property_readonly("tau_up", &ControllerConfig::tau_up)
      .def_property_readonly("tau_down", &ControllerConfig::tau_down)
      .def_property_readonly("back", &ControllerConfig::back)
      .def_property_readonly("fwd", &ControllerConfig::fwd)
      .def_property_readonly("alpha_low", &ControllerConfig::alpha_low)
      .def_property_readonly("alpha_high", &ControllerConfig::alpha_high);

  py::class_<ControllerDecision>(m, "ControllerDecision")
      .def_readonly("next_mode", &ControllerDecision::next_mode)
      .def_readonly("action", &ControllerDecision::action)
      .def_readonly("left", &ControllerDecision::left)
      .def_readonly("right", &ControllerDecision::right);

  py::class_<Controller>(m, "Controller")
      .def(py::init<ControllerConfig>(), py::arg("config"))
      .def("observe", &Controller::observe, py::arg("entropy"), py::arg("pos"))
      .def_property_readonly("mode", [](const Controller& c) { return c.state().mode(); })
      .def_property_readonly("window_end", [](const Controller& c) { return c.state().window_end(); })
      .def_property_readonly("covered", [](const Controller& c) { return c.coverage().covered_count(); });

  py::class_<EpisodeResult>(m, "EpisodeResult")
      .def_readonly("correct", &EpisodeResult::correct)
      .def_readonly("kept_tokens", &EpisodeResult::kept_tokens)
      .def_readonly("compute_tokens", &EpisodeResult::compute_tokens)
      .def_readonly("thinking_coverage", &EpisodeResult::thinking_coverage)
      .def_readonly("overhead_ratio", &EpisodeResult::overhead_ratio)
      .def_property_readonly("triggers", [](const EpisodeResult& r) { return r.trace.trigger_count(); })
      .def_property_readonly("switches", [](const EpisodeResult& r) { return r.trace.ledger.switches; })
      .def_property_readonly("prefill_tokens",
                             [](const EpisodeResult& r) { return r.trace.ledger.total_prefill_tokens; })
      .def_property_readonly("modes", [](const EpisodeResult& r) { return mode_string(r.trace); })
      .def_property_readonly("entropies",
                             [](const EpisodeResult& r) {
                               std::vector<double> h;
                               for (const auto& k : r.trace.kept) h.push_back(k.entropy);
                               return h;
                             })
      .def("trace_jsonl", [](const EpisodeResult& r) { return trace_jsonl(r.trace); });

  m.def(
      "run_scripted",
      [](const std::string& scenario_name, const ControllerConfig& controller, std::uint64_t seed,
         double temperature, bool kv_invariant_adapter, std::size_t max_kept,
         std::size_t max_compute) {
        ScriptedBackend::Options opts;
        opts.alpha_low = controller.alpha_low();
        opts.alpha_high = controller.alpha_high();
        opts.kv_invariant_adapter = kv_invariant_adapter;
        opts.name = scenario_name;
        const ScriptedBackend backend(scenario(scenario_name), opts);
        py::gil_scoped_release release;
        return run_episode(backend,
                           engine_config(controller, seed, temperature, max_kept, max_compute));
      },
      py::arg("scenario"), py::arg("config"), py::arg("seed") = 0, py::arg("temperature") = 1.0,
      py::arg("kv_invariant_adapter") = false, py::arg("max_kept") = 4096,
      py::arg("max_compute") = 16384,
      "Decode one episode of a scripted scenario (S1, fork3, routine, pattern:RF...) and grade it.");

  m.def(
      "replay",
      [](const std::vector<double>& entropies, const ControllerConfig& controller,
         bool kv_invariant_adapter) {
        const ReplayBackend backend(entropies, kv_invariant_adapter);
        const std::vector<TokenId> prompt{ReplayBackend::kPlaceholder};
        py::gil_scoped_release release;
        return evaluate(decode(prompt, backend, engine_config(controller, 0, 1.0, 4096, 16384)),
                        false);
      },
      py::arg("entropies"), py::arg("config"), py::arg("kv_invariant_adapter") = false,
      "Drive the controller with a recorded entropy sequence (ungraded).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the mixdecode command line; returns (exit_code, stdout, stderr).");
}
