/**
 * Copyright 2026 The dagpool Authors
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

#include <boost/asio.hpp>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>

#include "dagpool/messages.hpp"
#include "dagpool/primary.hpp"

namespace dagpool {

namespace asio = boost::asio;

struct TransportConfig {
  size_t max_queue_msgs = 10'000;
  size_t max_queue_bytes = 64 * 1024 * 1024;
  TimeUs backoff_min_us = 50'000;
  TimeUs backoff_max_us = 2'000'000;
  // Frames above this are treated as a protocol violation and the stream closed.
  size_t max_frame_bytes = 80 * 1024 * 1024;
};

struct TransportStats {
  uint64_t frames_sent = 0;
  uint64_t frames_received = 0;
  uint64_t bytes_sent = 0;
  uint64_t evicted = 0;
  uint64_t rejected = 0;
  uint64_t connects = 0;
  uint64_t disconnects = 0;
  uint64_t bad_frames = 0;
};

// "host:port" -> (host, port). Throws std::invalid_argument.
std::pair<std::string, uint16_t> split_address(const std::string& addr);

// Length-prefixed frame: u32 LE length followed by the body.
Bytes frame(std::span<const uint8_t> body);

// Outgoing streams, one per peer address, plus any number of listeners.
// Everything runs on the caller's io_context; not thread-safe.
class Transport {
 public:
  using MessageHandler = std::function<void(MessagePtr)>;
  using FrameHandler = std::function<void(Bytes)>;

  explicit Transport(asio::io_context& io, TransportConfig config = {}, uint64_t seed = 0);
  ~Transport();
  Transport(const Transport&) = delete;
  Transport& operator=(const Transport&) = delete;

  // Returns the bound port (useful with port 0).
  uint16_t listen(const std::string& addr, MessageHandler handler);
  uint16_t listen_frames(const std::string& addr, FrameHandler handler);

  // False when the peer queue is full of messages that cannot be evicted.
  bool send(const std::string& addr, const MessagePtr& msg, Round cancel_round);
  bool send_bytes(const std::string& addr, Bytes body, Round cancel_round);

  // Drops queued messages whose cancel round is below `round`.
  void set_round(Round round);
  void close();

  size_t queued(const std::string& addr) const;
  size_t queued_bytes(const std::string& addr) const;
  bool connected(const std::string& addr) const;
  const TransportStats& stats() const { return stats_; }

 private:
  class Channel;
  class Listener;
  class Session;

  Channel& channel(const std::string& addr);

  asio::io_context& io_;
  const TransportConfig config_;
  std::mt19937_64 rng_;
  std::map<std::string, std::shared_ptr<Channel>> channels_;
  std::vector<std::shared_ptr<Listener>> listeners_;
  Round round_ = 0;
  TransportStats stats_;
};

}  // namespace dagpool
