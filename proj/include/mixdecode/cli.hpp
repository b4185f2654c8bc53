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

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mixdecode/engine.hpp"
#include "mixdecode/metrics.hpp"

namespace mixdecode {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitBackend = 3 };

struct BackendOptions {
  double alpha_low = 0.0;
  double alpha_high = 1.0;
  bool kv_invariant_adapter = false;
};

/// A constructed backend plus what is needed to run episodes against it.
struct BackendHandle {
  std::unique_ptr<ModelBackend> backend;
  /// Set for scripted backends; episodes are then graded.
  const ScriptedBackend* scripted = nullptr;
  std::vector<TokenId> prompt;
};

/// Builds a backend from "scripted:<scenario>", "replay:<file>" or
/// "remote:<command or tcp://host:port>". Throws ConfigError on a bad selector
/// or unreadable replay file.
BackendHandle make_backend(std::string_view selector, const BackendOptions& options);

/// Runs one episode. Non-scripted backends are not graded (correct=false).
EpisodeResult run_one(const BackendHandle& handle, const EngineConfig& cfg);

/// Seed of a sweep point: seed XOR a hash of the point's parameters.
std::uint64_t point_seed(std::uint64_t seed, const ConfigPoint& point);

/// Runs `episodes` episodes with seeds base.seed, base.seed + 1, ... and
/// aggregates them.
SweepResult run_point(const BackendHandle& handle, const EngineConfig& base, std::size_t episodes);

/// Entry point of the `mixdecode` tool; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixdecode
