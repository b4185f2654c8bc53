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
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "mixdecode/types.hpp"

namespace mixdecode {

/// Writes the line-delimited trace format described in docs/trace-format.md:
/// header line, one record per kept token, discarded tokens, events, summary.
void write_trace(std::ostream& out, const DecodeTrace& trace);

/// Parses the same format. Throws ConfigError on malformed input.
DecodeTrace read_trace(std::istream& in);

/// True if `text` starts with a trace header line.
bool looks_like_trace(std::string_view text);

/// One forward pass of the decode, reconstructed from a trace.
struct ForwardStep {
  enum class Kind : std::uint8_t { kept, discarded, probe, eos };

  std::uint64_t seq = 0;
  std::size_t pos = 0;
  Mode mode = Mode::concise;
  double entropy = 0.0;
  Kind kind = Kind::kept;
};

/// Every forward step of a trace in execution order (kept and discarded
/// tokens, trigger probes and the final eos step).
std::vector<ForwardStep> forward_journal(const DecodeTrace& trace);

}  // namespace mixdecode
