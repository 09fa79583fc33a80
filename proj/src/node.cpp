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

#include "dagpool/node.hpp"

#include <spdlog/spdlog.h>

#include <chrono>

#include "dagpool/workload.hpp"

namespace dagpool {

TimeUs wall_us() {
  using namespace std::chrono;
  return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

namespace {

TimeUs steady_us() {
  using namespace std::chrono;
  return duration_cast<microseconds>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

struct Node::PrimaryLink final : PrimaryIo {
  explicit PrimaryLink(Node& n) : node(n) {}
  void send(AuthorityIndex to, MessagePtr msg, Round cancel) override {
    node.transport_.send(node.committee_.authority(to).primary_addr, msg, cancel);
  }
  void send_to_worker(WorkerId w, MessagePtr msg) override {
    asio::post(node.io_, [this, w, msg] {
      if (node.stopped_) return;
      node.validator_->handle_worker(w, *msg);
      node.after_step();
    });
  }
  TimeUs now() const override { return steady_us(); }
  Node& node;
};

struct Node::WorkerLink final : WorkerIo {
  WorkerLink(Node& n, WorkerId w) : node(n), id(w) {}
  void send(AuthorityIndex to, MessagePtr msg, Round cancel) override {
    node.transport_.send(node.committee_.authority(to).worker_addrs.at(id), msg, cancel);
  }
  void send_to_primary(MessagePtr msg) override {
    asio::post(node.io_, [this, msg] {
      if (node.stopped_) return;
      node.validator_->handle_primary(*msg);
      node.after_step();
    });
  }
  TimeUs now() const override { return steady_us(); }
  Node& node;
  WorkerId id;
};

Node::Node(asio::io_context& io, Committee committee, KeyPair key, NodeConfig config)
    : io_(io),
      committee_(std::move(committee)),
      key_(std::move(key)),
      config_(std::move(config)),
      coin_(config_.coin_seed),
      transport_(io, config_.transport, config_.coin_seed ^ config_.index),
      ticker_(io) {
  const auto& me = committee_.authority(config_.index);
  if (me.key != key_.public_key()) throw std::invalid_argument("key does not match committee ordinal");
  primary_link_ = std::make_unique<PrimaryLink>(*this);
  std::vector<WorkerIo*> ws;
  for (WorkerId w = 0; w < me.worker_addrs.size(); ++w) {
    worker_links_.push_back(std::make_unique<WorkerLink>(*this, w));
    ws.push_back(worker_links_.back().get());
  }
  std::unique_ptr<StoreBackend> backend;
  if (!config_.store_dir.empty()) backend = std::make_unique<LogBackend>(config_.store_dir);
  validator_ = std::make_unique<Validator>(config_.index, committee_, key_, coin_, *primary_link_, ws,
                                           config_.validator, std::move(backend));
  if (!config_.log_path.empty()) {
    log_.open(config_.log_path, std::ios::out | std::ios::trunc);
    if (!log_) throw std::runtime_error("cannot open " + config_.log_path);
  }
  validator_->on_commit([this](const CommitEvent& ev) { log_commit(ev); });
  validator_->on_outcome([this](const WaveOutcome& o) {
    if (!log_.is_open()) return;
    log_ << "W " << o.wave << ' ' << o.leader << ' ' << o.leader_present << ' ' << o.support << ' '
         << o.committed_directly << ' ' << o.committable << ' ' << o.proposal_certificates << ' '
         << o.vote_certificates << '\n';
  });
}

Node::~Node() { stop(); }

void Node::start() {
  const auto& me = committee_.authority(config_.index);
  transport_.listen(me.primary_addr, [this](MessagePtr m) {
    if (stopped_) return;
    validator_->handle_primary(*m);
    after_step();
  });
  for (WorkerId w = 0; w < me.worker_addrs.size(); ++w) {
    transport_.listen(me.worker_addrs[w], [this, w](MessagePtr m) {
      if (stopped_) return;
      validator_->handle_worker(w, *m);
      after_step();
    });
    if (w < me.tx_addrs.size()) {
      transport_.listen_frames(me.tx_addrs[w], [this, w](Bytes tx) {
        if (stopped_) return;
        if (validator_->submit(w, std::move(tx)) != IngestResult::kAccepted) ++rejected_;
        after_step();
      });
    }
  }
  validator_->start();
  after_step();
  spdlog::debug("validator {} listening on {}", config_.index, me.primary_addr);
  tick();
}

void Node::stop() {
  if (stopped_) return;
  stopped_ = true;
  ticker_.cancel();
  transport_.close();
  if (log_.is_open()) log_.flush();
}

void Node::after_step() { transport_.set_round(validator_->primary().round()); }

void Node::tick() {
  if (stopped_) return;
  validator_->on_tick();
  after_step();
  TimeUs now = wall_us();
  if (log_.is_open() && now >= next_memory_sample_) {
    const auto& p = validator_->primary();
    log_ << "M " << now << ' ' << p.round() << ' ' << (p.gc_round() ? static_cast<int64_t>(*p.gc_round()) : -1)
         << ' ' << p.hot_rounds() << ' ' << validator_->consensus().hot_rounds() << '\n';
    log_.flush();
    next_memory_sample_ = now + config_.memory_sample_us;
  }
  ticker_.expires_after(std::chrono::microseconds(config_.tick_us));
  ticker_.async_wait([this](const boost::system::error_code& e) {
    if (!e) tick();
  });
}

void Node::log_commit(const CommitEvent& ev) {
  if (!log_.is_open()) return;
  TimeUs now = wall_us();
  log_ << "C " << now << ' ' << ev.wave << ' ' << ev.leader->round() << ' ' << ev.leader->digest().hex() << ' '
       << validator_->primary().round() << '\n';
  for (const auto& h : ev.headers) {
    log_ << "H " << h->digest().hex() << ' ' << h->round() << ' ' << h->author() << '\n';
    for (const auto& ref : h->payload()) {
      auto batch = validator_->store().read_batch(ref.digest);
      log_ << "B " << ref.digest.hex() << ' ' << (batch ? static_cast<int64_t>(batch->transactions().size()) : -1)
           << '\n';
      if (!batch) continue;
      for (const auto& tx : batch->transactions()) {
        auto info = parse_tx(tx);
        if (info && info->sample) {
          log_ << "S " << info->id() << ' ' << info->submit_us << ' ' << now << ' ' << ev.wave << '\n';
        }
      }
    }
  }
  log_.flush();
}

}  // namespace dagpool
