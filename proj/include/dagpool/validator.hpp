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
#include <memory>
#include <vector>

#include "dagpool/consensus.hpp"
#include "dagpool/primary.hpp"
#include "dagpool/store.hpp"
#include "dagpool/worker.hpp"

namespace dagpool {

struct ValidatorConfig {
  PrimaryConfig primary;
  WorkerConfig worker;
  Round gc_depth = 50;
  // Off only for message-census comparisons.
  bool consensus = true;
};

// One validator: a primary, its workers, a store and the ordering layer,
// wired so that accepted certificates feed consensus and commits feed back
// into garbage collection.
class Validator {
 public:
  using CommitHook = std::function<void(const CommitEvent&)>;
  using OutcomeHook = std::function<void(const WaveOutcome&)>;
  using AcceptHook = std::function<void(const CertificatePtr&, const HeaderPtr&)>;

  Validator(AuthorityIndex self, const Committee& committee, const KeyPair& key, const CoinSource& coin,
            PrimaryIo& primary_io, std::vector<WorkerIo*> worker_io, ValidatorConfig config,
            std::unique_ptr<StoreBackend> backend = nullptr);

  void start();
  void handle_primary(const Message& msg);
  void handle_worker(WorkerId id, const Message& msg);
  IngestResult submit(WorkerId id, Transaction tx);
  void on_tick();

  void on_commit(CommitHook h) { commit_hook_ = std::move(h); }
  void on_outcome(OutcomeHook h) { outcome_hook_ = std::move(h); }
  void on_accept(AcceptHook h) { accept_hook_ = std::move(h); }

  AuthorityIndex index() const { return self_; }
  Primary& primary() { return *primary_; }
  const Primary& primary() const { return *primary_; }
  Worker& worker(WorkerId id) { return *workers_.at(id); }
  size_t worker_count() const { return workers_.size(); }
  BlockStore& store() { return *store_; }
  const Consensus& consensus() const { return *consensus_; }

 private:
  void pump();

  AuthorityIndex self_;
  std::unique_ptr<BlockStore> store_;
  std::unique_ptr<Primary> primary_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::unique_ptr<Consensus> consensus_;
  bool consensus_enabled_;
  CommitHook commit_hook_;
  OutcomeHook outcome_hook_;
  AcceptHook accept_hook_;
};

}  // namespace dagpool
