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
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "mixdecode/backend.hpp"
#include "mixdecode/channel.hpp"

namespace mixdecode {

/// Where a remote backend lives: a command to spawn (stdio) or tcp://host:port.
struct RemoteEndpoint {
  enum class Kind : std::uint8_t { command, tcp };

  Kind kind = Kind::command;
  std::string command;
  std::string host;
  std::uint16_t port = 0;

  /// "tcp://host:port" selects TCP; anything else is a shell command.
  static RemoteEndpoint parse(std::string_view spec);
};

/// Client side of the wire protocol for one session. Any failure (error
/// reply, malformed reply, timeout, version mismatch) raises BackendError and
/// poisons the session: later calls fail immediately.
class RemoteSession : public BackendSession {
 public:
  RemoteSession(std::unique_ptr<LineChannel> channel, std::string session_id,
                std::chrono::milliseconds timeout);
  ~RemoteSession() override;

  /// init + prefill exchange.
  void handshake(std::span<const TokenId> prompt, double alpha);

  const Capabilities& capabilities() const override { return caps_; }
  std::size_t vocab_size() const override { return vocab_size_; }
  std::size_t length() const override { return length_; }
  StepResult step(double alpha, double temperature, std::uint64_t seed_draw) override;
  void rollback(std::size_t to_len) override;
  void close() override;

  bool poisoned() const noexcept { return poisoned_; }
  const std::string& session_id() const noexcept { return id_; }

 private:
  std::string exchange(const std::string& request);
  template <typename F>
  auto guarded(F&& f) -> decltype(f());

  std::unique_ptr<LineChannel> channel_;
  std::string id_;
  std::chrono::milliseconds timeout_;
  Capabilities caps_;
  std::size_t vocab_size_ = 0;
  std::size_t length_ = 0;
  bool poisoned_ = false;
  bool closed_ = false;
};

class RemoteBackend : public ModelBackend {
 public:
  using ChannelFactory = std::function<std::unique_ptr<LineChannel>()>;

  explicit RemoteBackend(RemoteEndpoint endpoint,
                         std::chrono::milliseconds timeout = std::chrono::seconds(30));
  /// Sessions talk over channels produced by `factory` (tests inject fakes).
  RemoteBackend(ChannelFactory factory, std::string label, std::chrono::milliseconds timeout);

  /// Each session gets its own connection (or child process).
  std::unique_ptr<BackendSession> open_session(const std::string& session_id,
                                               std::span<const TokenId> prompt,
                                               double alpha) const override;
  std::string describe() const override { return "remote:" + label_; }

 private:
  ChannelFactory factory_;
  std::string label_;
  std::chrono::milliseconds timeout_;
};

}  // namespace mixdecode
