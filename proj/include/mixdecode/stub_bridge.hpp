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

#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

#include "mixdecode/scripted_backend.hpp"

namespace mixdecode {

/// Protocol server backed by the scripted policy pair. It reports
/// emits_full_dist=false and computes entropies itself, which exercises the
/// remote path the way an external model server would. Every request gets
/// exactly one response line; malformed input is answered with an error code
/// and never ends the stream.
class StubBridge {
 public:
  explicit StubBridge(ScriptedBackend backend);

  /// Handles one request line and returns the response line (no newline).
  std::string handle(std::string_view line);

  /// Reads requests from `in` until EOF, writing one response per line.
  void serve(std::istream& in, std::ostream& out);

  std::size_t open_sessions() const noexcept { return sessions_.size(); }

 private:
  struct Session {
    std::unique_ptr<BackendSession> backend;  // null until prefill
  };

  ScriptedBackend backend_;
  std::map<std::string, Session, std::less<>> sessions_;
};

}  // namespace mixdecode
