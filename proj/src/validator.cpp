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

#include "dagpool/validator.hpp"

namespace dagpool {

Validator::Validator(AuthorityIndex self, const Committee& committee, const KeyPair& key, const CoinSource& coin,
                     PrimaryIo& primary_io, std::vector<WorkerIo*> worker_io, ValidatorConfig config,
                     std::unique_ptr<StoreBackend> backend)
    : self_(self), consensus_enabled_(config.consensus) {
  store_ = backend ? std::make_unique<BlockStore>(std::move(backend)) : std::make_unique<BlockStore>();
  primary_ = std::make_unique<Primary>(self, committee, key, *store_, primary_io, config.primary);
  for (WorkerId j = 0; j < worker_io.size(); ++j) {
    workers_.push_back(std::make_unique<Worker>(self, j, committee, key, *store_, *worker_io[j], config.worker));
  }
  consensus_ = std::make_unique<Consensus>(committee, coin, config.gc_depth);
}

void Validator::start() {
  primary_->start();
  pump();
}

void Validator::handle_primary(const Message& msg) {
  primary_->handle(msg);
  pump();
}

void Validator::handle_worker(WorkerId id, const Message& msg) { workers_.at(id)->handle(msg); }

IngestResult Validator::submit(WorkerId id, Transaction tx) { return workers_.at(id)->ingest(std::move(tx)); }

void Validator::on_tick() {
  primary_->on_tick();
  for (auto& w : workers_) w->on_tick();
  pump();
}

void Validator::pump() {
  for (;;) {
    auto accepted = primary_->take_accepted();
    if (accepted.empty()) return;
    for (const auto& cert : accepted) {
      HeaderPtr h = store_->read_header(cert->header_digest());
      if (accept_hook_) accept_hook_(cert, h);
      if (!consensus_enabled_) continue;
      auto events = consensus_->add(cert, h);
      for (const auto& o : consensus_->take_outcomes()) {
        if (outcome_hook_) outcome_hook_(o);
      }
      for (const auto& ev : events) {
        if (commit_hook_) commit_hook_(ev);
        primary_->on_committed(ev.headers);
      }
      if (!events.empty() && events.back().gc_round) primary_->garbage_collect(*events.back().gc_round);
    }
  }
}

}  // namespace dagpool
