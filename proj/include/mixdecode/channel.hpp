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

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace mixdecode {

/// Newline-framed byte stream. recv_line strips the terminator and throws
/// std::runtime_error on timeout, EOF or I/O failure.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(std::string_view line) = 0;
  virtual std::string recv_line(std::chrono::milliseconds timeout) = 0;
};

/// Runs `command` through /bin/sh and talks to its stdin/stdout. The child is
/// terminated when the channel is destroyed. SIGPIPE is ignored process-wide
/// once a child has been spawned, so a dead peer surfaces as a write error.
std::unique_ptr<LineChannel> spawn_process_channel(const std::string& command);

std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, std::uint16_t port);

}  // namespace mixdecode
