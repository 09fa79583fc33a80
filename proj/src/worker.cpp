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

#include "dagpool/worker.hpp"

namespace dagpool {

Worker::Worker(AuthorityIndex self, WorkerId id, const Committee& committee, const KeyPair& key,
               BlockStore& store, WorkerIo& io, WorkerConfig config)
    : self_(self), id_(id), committee_(committee), key_(key), store_(store), io_(io), config_(config) {}

IngestResult Worker::ingest(Transaction tx) {
  if (tx.empty()) return IngestResult::kEmpty;
  if (tx.size() > config_.max_tx_bytes) {
    ++metrics_.txs_rejected;
    return IngestResult::kOversize;
  }
  if (pending_bytes() + tx.size() > config_.max_pending_bytes) {
    ++metrics_.txs_rejected;
    return IngestResult::kBackpressure;
  }
  if (buffer_.empty()) buffer_started_ = io_.now();
  buffer_bytes_ += tx.size();
  buffer_.push_back(std::move(tx));
  ++metrics_.txs_ingested;
  if (buffer_.size() >= config_.batch_max_txs || buffer_bytes_ >= config_.batch_max_bytes) seal();
  return IngestResult::kAccepted;
}

void Worker::seal() {
  if (buffer_.empty()) return;
  auto batch = std::make_shared<const Batch>(id_, std::move(buffer_));
  buffer_.clear();
  buffer_bytes_ = 0;
  store_.write(batch);
  ++metrics_.batches_sealed;
  metrics_.bytes_sealed += batch->payload_bytes();
  if (seal_hook_) seal_hook_(batch);

  in_flight_bytes_ += batch->payload_bytes();
  in_flight_[batch->digest()] = InFlight{batch, {self_}};
  auto msg = make_message(BatchMsg{self_, batch});
  for (AuthorityIndex i = 0; i < committee_.size(); ++i) {
    if (i != self_) io_.send(i, msg, kNeverCancel);
  }
  // n = 1 never happens (n >= 4), but a quorum of one self-ack would report here.
  if (committee_.quorum() <= 1) handle_ack(BatchAckMsg{batch->digest(), self_, {}});
}

void Worker::handle(const Message& msg) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BatchMsg>) {
          handle_batch(m);
        } else if constexpr (std::is_same_v<T, BatchAckMsg>) {
          handle_ack(m);
        } else if constexpr (std::is_same_v<T, BatchRequestMsg>) {
          handle_request(m);
        } else if constexpr (std::is_same_v<T, BatchReplyMsg>) {
          handle_reply(m);
        } else if constexpr (std::is_same_v<T, SynchronizeMsg>) {
          handle_synchronize(m);
        } else if constexpr (std::is_same_v<T, RoundUpdateMsg>) {
          round_ = std::max(round_, m.round);
          if (m.gc_round) gc_round_ = m.gc_round;
          std::erase_if(pulls_, [&](const auto& kv) { return gc_round_ && kv.second.round <= *gc_round_; });
        } else {
          ++metrics_.invalid_messages;
        }
      },
      msg);
}

void Worker::handle_batch(const BatchMsg& m) {
  if (!m.batch || m.origin >= committee_.size() || m.origin == self_ || m.batch->worker_id() != id_) {
    ++metrics_.invalid_messages;
    return;
  }
  const Digest& d = m.batch->digest();
  if (!store_.read_batch(d)) {
    store_.write(m.batch);
    ++metrics_.batches_stored;
  }
  BatchAckMsg ack{d, self_, key_.sign(batch_ack_message(d, self_))};
  io_.send(m.origin, make_message(std::move(ack)), kNeverCancel);
  io_.send_to_primary(make_message(OthersBatchMsg{d, id_}));
  pulls_.erase(d);
}

void Worker::handle_ack(const BatchAckMsg& m) {
  auto it = in_flight_.find(m.digest);
  if (it == in_flight_.end()) return;
  if (m.from != self_) {
    if (m.from >= committee_.size() || !verify(committee_.key(m.from), batch_ack_message(m.digest, m.from), m.signature)) {
      ++metrics_.invalid_messages;
      return;
    }
  }
  it->second.acks.insert(m.from);
  if (it->second.acks.size() < committee_.quorum()) return;
  in_flight_bytes_ -= it->second.batch->payload_bytes();
  in_flight_.erase(it);
  ++metrics_.batches_reported;
  io_.send_to_primary(make_message(OurBatchMsg{m.digest, id_}));
}

void Worker::handle_request(const BatchRequestMsg& m) {
  if (m.requester >= committee_.size() || m.requester == self_) return;
  for (const auto& d : m.digests) {
    if (auto b = store_.read_batch(d)) io_.send(m.requester, make_message(BatchReplyMsg{b}), kNeverCancel);
  }
}

void Worker::handle_reply(const BatchReplyMsg& m) {
  if (!m.batch) return;
  const Digest& d = m.batch->digest();
  // Digest is recomputed locally, so an unrequested or altered batch simply misses.
  if (!pulls_.count(d) || m.batch->worker_id() != id_) {
    ++metrics_.invalid_messages;
    return;
  }
  pulls_.erase(d);
  if (!store_.read_batch(d)) {
    store_.write(m.batch);
    ++metrics_.batches_stored;
  }
  ++metrics_.pulls_completed;
  io_.send_to_primary(make_message(OthersBatchMsg{d, id_}));
}

void Worker::handle_synchronize(const SynchronizeMsg& m) {
  for (const auto& d : m.digests) {
    if (store_.read_batch(d)) {
      io_.send_to_primary(make_message(OthersBatchMsg{d, id_}));
      continue;
    }
    if (m.targets.empty()) continue;
    auto [it, fresh] = pulls_.try_emplace(d);
    Pull& p = it->second;
    p.round = std::max(p.round, m.round);
    if (!fresh) continue;
    p.targets = m.targets;
    request(d, p);
  }
}

void Worker::request(const Digest& d, Pull& p) {
  AuthorityIndex to = p.targets[p.next % p.targets.size()];
  p.next = (p.next + 1) % p.targets.size();
  p.last_sent = io_.now();
  ++metrics_.pull_requests_sent;
  io_.send(to, make_message(BatchRequestMsg{self_, {d}}), round_);
}

void Worker::on_tick() {
  if (!buffer_.empty() && io_.now() - buffer_started_ >= config_.batch_timeout_us) seal();
  TimeUs now = io_.now();
  for (auto& [d, p] : pulls_) {
    if (now - p.last_sent >= config_.pull_timeout_us) request(d, p);
  }
}

}  // namespace dagpool
