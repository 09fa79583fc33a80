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

#include <fstream>
#include <memory>
#include <string>

#include "dagpool/committee.hpp"
#include "dagpool/transport.hpp"
#include "dagpool/validator.hpp"

namespace dagpool {

struct NodeConfig {
  AuthorityIndex index = 0;
  ValidatorConfig validator;
  TransportConfig transport;
  uint64_t coin_seed = 0;
  // Line-oriented event log; empty disables it.
  std::string log_path;
  // Persistent store directory; empty keeps everything in memory.
  std::string store_dir;
  TimeUs tick_us = 10'000;
  TimeUs memory_sample_us = 1'000'000;
};

// Wall-clock microseconds, shared by clients and nodes on one host.
TimeUs wall_us();

// One validator process: primary, workers and the client endpoints, all on a
// single io_context thread.
class Node {
 public:
  Node(asio::io_context& io, Committee committee, KeyPair key, NodeConfig config);
  ~Node();

  void start();
  void stop();

  Validator& validator() { return *validator_; }
  const Transport& transport() const { return transport_; }
  uint64_t rejected_txs() const { return rejected_; }

 private:
  struct PrimaryLink;
  struct WorkerLink;

  void after_step();
  void tick();
  void log_commit(const CommitEvent& ev);

  asio::io_context& io_;
  const Committee committee_;
  const KeyPair key_;
  const NodeConfig config_;
  SeededCoin coin_;
  Transport transport_;
  std::unique_ptr<PrimaryLink> primary_link_;
  std::vector<std::unique_ptr<WorkerLink>> worker_links_;
  std::unique_ptr<Validator> validator_;
  asio::steady_timer ticker_;
  TimeUs next_memory_sample_ = 0;
  std::ofstream log_;
  uint64_t rejected_ = 0;
  bool stopped_ = false;
};

}  // namespace dagpool
