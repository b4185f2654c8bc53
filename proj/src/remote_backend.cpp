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

#include "mixdecode/remote_backend.hpp"

#include <charconv>

#include "mixdecode/protocol.hpp"

namespace mixdecode {

RemoteEndpoint RemoteEndpoint::parse(std::string_view spec) {
  constexpr std::string_view kTcp = "tcp://";
  RemoteEndpoint ep;
  if (!spec.starts_with(kTcp)) {
    if (spec.empty()) throw ConfigError("remote backend needs a command or tcp://host:port");
    ep.kind = Kind::command;
    ep.command = std::string(spec);
    return ep;
  }
  const std::string_view rest = spec.substr(kTcp.size());
  const auto colon = rest.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ConfigError("expected tcp://host:port, got '" + std::string(spec) + "'");
  }
  const std::string_view port_text = rest.substr(colon + 1);
  unsigned port = 0;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port == 0 || port > 65535) {
    throw ConfigError("bad port in '" + std::string(spec) + "'");
  }
  ep.kind = Kind::tcp;
  ep.host = std::string(rest.substr(0, colon));
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

RemoteSession::RemoteSession(std::unique_ptr<LineChannel> channel, std::string session_id,
                             std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), id_(std::move(session_id)), timeout_(timeout) {}

RemoteSession::~RemoteSession() {
  try {
    close();
  } catch (...) {
  }
}

template <typename F>
auto RemoteSession::guarded(F&& f) -> decltype(f()) {
  if (poisoned_) throw BackendError(id_, "session poisoned by an earlier failure");
  if (closed_) throw BackendError(id_, "session already closed");
  try {
    return f();
  } catch (const BackendError&) {
    poisoned_ = true;
    throw;
  } catch (const std::exception& e) {
    poisoned_ = true;
    throw BackendError(id_, e.what());
  }
}

std::string RemoteSession::exchange(const std::string& request) {
  channel_->send_line(request);
  return channel_->recv_line(timeout_);
}

void RemoteSession::handshake(std::span<const TokenId> prompt, double alpha) {
  guarded([&] {
    const auto init = protocol::parse_init_reply(exchange(protocol::init_request(id_)));
    caps_ = init.capabilities;
    vocab_size_ = init.vocab_size;
    const std::size_t cached = protocol::parse_prefill_reply(
        exchange(protocol::prefill_request(id_, alpha, prompt)));
    if (cached != prompt.size()) {
      throw BackendError(id_, "prefill reported cached_len " + std::to_string(cached) +
                                  ", expected " + std::to_string(prompt.size()));
    }
    length_ = cached;
  });
}

StepResult RemoteSession::step(double alpha, double temperature, std::uint64_t seed_draw) {
  return guarded([&] {
    const auto reply =
        protocol::parse_step_reply(exchange(protocol::step_request(id_, alpha, temperature, seed_draw)));
    if (!reply.eos && reply.token >= vocab_size_) {
      throw BackendError(id_, "token " + std::to_string(reply.token) + " outside vocabulary");
    }
    StepResult r;
    r.token = reply.token;
    r.eos = reply.eos;
    r.entropy = reply.entropy;
    r.logprob = reply.logprob;
    if (!r.eos) ++length_;
    return r;
  });
}

void RemoteSession::rollback(std::size_t to_len) {
  guarded([&] {
    protocol::parse_rollback_reply(exchange(protocol::rollback_request(id_, to_len)));
    length_ = to_len;
  });
}

void RemoteSession::close() {
  if (closed_ || poisoned_) {
    closed_ = true;
    return;
  }
  guarded([&] { protocol::parse_close_reply(exchange(protocol::close_request(id_))); });
  closed_ = true;
}

RemoteBackend::RemoteBackend(RemoteEndpoint endpoint, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (endpoint.kind == RemoteEndpoint::Kind::tcp) {
    label_ = "tcp://" + endpoint.host + ":" + std::to_string(endpoint.port);
    factory_ = [host = endpoint.host, port = endpoint.port] { return connect_tcp_channel(host, port); };
  } else {
    label_ = endpoint.command;
    factory_ = [cmd = endpoint.command] { return spawn_process_channel(cmd); };
  }
}

RemoteBackend::RemoteBackend(ChannelFactory factory, std::string label,
                             std::chrono::milliseconds timeout)
    : factory_(std::move(factory)), label_(std::move(label)), timeout_(timeout) {}

std::unique_ptr<BackendSession> RemoteBackend::open_session(const std::string& session_id,
                                                            std::span<const TokenId> prompt,
                                                            double alpha) const {
  std::unique_ptr<LineChannel> channel;
  try {
    channel = factory_();
  } catch (const std::exception& e) {
    throw BackendError(session_id, std::string("cannot reach backend: ") + e.what());
  }
  auto session = std::make_unique<RemoteSession>(std::move(channel), session_id, timeout_);
  session->handshake(prompt, alpha);
  return session;
}

}  // namespace mixdecode
