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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "dagpool/committee.hpp"
#include "dagpool/crypto.hpp"
#include "dagpool/messages.hpp"
#include "dagpool/primary.hpp"
#include "dagpool/store.hpp"

namespace dagpool {

struct WorkerConfig {
  size_t batch_max_txs = 1000;
  size_t batch_max_bytes = 500 * 1024;
  TimeUs batch_timeout_us = 100'000;
  size_t max_tx_bytes = 64 * 1024;
  // Buffered plus unacknowledged bytes above which ingestion is refused.
  size_t max_pending_bytes = 64 * 1024 * 1024;
  TimeUs pull_timeout_us = 250'000;
};

// Effects the worker asks of its environment. Peer messages go to the worker
// with the same id at another validator.
class WorkerIo {
 public:
  virtual ~WorkerIo() = default;
  virtual void send(AuthorityIndex to, MessagePtr msg, Round cancel_round) = 0;
  virtual void send_to_primary(MessagePtr msg) = 0;
  virtual TimeUs now() const = 0;
};

struct WorkerMetrics {
  uint64_t txs_ingested = 0;
  uint64_t txs_rejected = 0;
  uint64_t batches_sealed = 0;
  uint64_t batches_reported = 0;
  uint64_t batches_stored = 0;
  uint64_t bytes_sealed = 0;
  uint64_t pull_requests_sent = 0;
  uint64_t pulls_completed = 0;
  uint64_t invalid_messages = 0;
};

enum class IngestResult { kAccepted, kOversize, kEmpty, kBackpressure };

class Worker {
 public:
  using SealHook = std::function<void(const BatchPtr&)>;

  Worker(AuthorityIndex self, WorkerId id, const Committee& committee, const KeyPair& key, BlockStore& store,
         WorkerIo& io, WorkerConfig config = {});

  IngestResult ingest(Transaction tx);
  void handle(const Message& msg);
  void on_tick();

  // Seals whatever is buffered.
  void seal();
  void set_seal_hook(SealHook hook) { seal_hook_ = std::move(hook); }

  WorkerId id() const { return id_; }
  size_t buffered_txs() const { return buffer_.size(); }
  size_t in_flight() const { return in_flight_.size(); }
  size_t pending_bytes() const { return buffer_bytes_ + in_flight_bytes_; }
  size_t active_pulls() const { return pulls_.size(); }
  const WorkerMetrics& metrics() const { return metrics_; }

 private:
  struct InFlight {
    BatchPtr batch;
    std::set<AuthorityIndex> acks;
  };
  struct Pull {
    std::vector<AuthorityIndex> targets;
    size_t next = 0;
    TimeUs last_sent = 0;
    Round round = 0;
  };

  void handle_batch(const BatchMsg& m);
  void handle_ack(const BatchAckMsg& m);
  void handle_request(const BatchRequestMsg& m);
  void handle_reply(const BatchReplyMsg& m);
  void handle_synchronize(const SynchronizeMsg& m);
  void request(const Digest& d, Pull& p);

  const AuthorityIndex self_;
  const WorkerId id_;
  const Committee& committee_;
  const KeyPair& key_;
  BlockStore& store_;
  WorkerIo& io_;
  const WorkerConfig config_;

  std::vector<Transaction> buffer_;
  size_t buffer_bytes_ = 0;
  TimeUs buffer_started_ = 0;
  std::map<Digest, InFlight> in_flight_;
  size_t in_flight_bytes_ = 0;
  std::map<Digest, Pull> pulls_;
  Round round_ = 0;
  std::optional<Round> gc_round_;
  SealHook seal_hook_;
  WorkerMetrics metrics_;
};

}  // namespace dagpool
