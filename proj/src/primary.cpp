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

#include "dagpool/primary.hpp"

#include <algorithm>

namespace dagpool {

const char* byzantine_name(ByzantineMode m) {
  switch (m) {
    case ByzantineMode::kHonest: return "honest";
    case ByzantineMode::kEquivocator: return "equivocator";
    case ByzantineMode::kMute: return "mute";
    case ByzantineMode::kSelectiveVoter: return "selective-voter";
  }
  return "?";
}

VotesAggregator::VotesAggregator(HeaderPtr header, const Committee& committee)
    : header_(std::move(header)), committee_(committee) {}

std::optional<Certificate> VotesAggregator::append(const Vote& vote) {
  if (done_) return std::nullopt;
  const BlockHeader& h = *header_;
  if (vote.header_digest != h.digest() || vote.round != h.round() || vote.author != h.author()) return std::nullopt;
  if (vote.voter >= committee_.size() || voters_.count(vote.voter)) return std::nullopt;
  if (!verify(committee_.key(vote.voter), vote.message(), vote.signature)) return std::nullopt;
  voters_.insert(vote.voter);
  votes_.push_back({vote.voter, vote.signature});
  if (votes_.size() < committee_.quorum()) return std::nullopt;
  done_ = true;
  std::vector<VoteSignature> sigs = votes_;
  std::sort(sigs.begin(), sigs.end(), [](const auto& a, const auto& b) { return a.voter < b.voter; });
  return Certificate(h.digest(), h.round(), h.author(), std::move(sigs));
}

bool verify_certificate(const Certificate& cert, const Committee& committee) {
  if (cert.author() >= committee.size()) return false;
  if (cert.votes().size() < committee.quorum()) return false;
  std::set<AuthorityIndex> seen;
  for (const auto& v : cert.votes()) {
    if (v.voter >= committee.size() || !seen.insert(v.voter).second) return false;
    if (!verify(committee.key(v.voter), cert.digest(), v.signature)) return false;
  }
  return true;
}

BlockHeader genesis_header(AuthorityIndex author) { return BlockHeader(author, 0, {}, {}); }

Primary::Primary(AuthorityIndex self, const Committee& committee, const KeyPair& key, BlockStore& store,
                 PrimaryIo& io, PrimaryConfig config)
    : self_(self), committee_(committee), key_(key), store_(store), io_(io), config_(config) {}

void Primary::start() {
  if (started_) return;
  started_ = true;
  round_ = 0;
  if (config_.byzantine != ByzantineMode::kMute) propose(0);
}

void Primary::broadcast(const MessagePtr& msg, Round cancel_round) {
  for (AuthorityIndex i = 0; i < committee_.size(); ++i) {
    if (i != self_) io_.send(i, msg, cancel_round);
  }
}

std::vector<AuthorityIndex> Primary::others_first(AuthorityIndex first) const {
  std::vector<AuthorityIndex> out;
  if (first != self_) out.push_back(first);
  for (AuthorityIndex i = 0; i < committee_.size(); ++i) {
    if (i != self_ && i != first) out.push_back(i);
  }
  return out;
}

void Primary::propose(Round round) {
  if (last_proposed_ && last_proposed_->round() >= round && round != 0) return;
  if (last_proposed_ && round == 0) return;

  std::vector<Digest> parents;
  if (round > 0) {
    auto it = dag_.find(round - 1);
    if (it == dag_.end() || it->second.size() < committee_.quorum()) return;
    for (const auto& [author, cert] : it->second) parents.push_back(cert->digest());
  }
  std::vector<BatchRef> payload;
  payload.swap(pending_payload_);

  BlockHeader unsigned_h(self_, round, std::move(payload), std::move(parents));
  auto header = std::make_shared<const BlockHeader>(unsigned_h.with_signature(key_.sign(unsigned_h.digest())));
  last_proposed_ = header;
  own_headers_[round] = OwnHeader{header, false};
  store_.write(header);
  aggregators_.emplace(header->digest(), VotesAggregator(header, committee_));
  ++metrics_.headers_proposed;

  if (config_.byzantine == ByzantineMode::kEquivocator && round > 0) {
    equivocate(*header);
  } else {
    broadcast(make_message(HeaderMsg{header}), round);
  }
  process_header(header);
}

// Second header for the same round: parents in reverse order. Peers are
// split between the two versions; this validator votes for both.
void Primary::equivocate(const BlockHeader& first) {
  auto firstp = last_proposed_;
  std::vector<Digest> parents(first.parents().rbegin(), first.parents().rend());
  std::vector<BatchRef> payload = first.payload();
  if (parents == first.parents()) {
    if (payload.empty()) {
      broadcast(make_message(HeaderMsg{firstp}), first.round());
      return;
    }
    payload.clear();
  }
  BlockHeader u(self_, first.round(), std::move(payload), std::move(parents));
  auto second = std::make_shared<const BlockHeader>(u.with_signature(key_.sign(u.digest())));
  store_.write(second);
  aggregators_.emplace(second->digest(), VotesAggregator(second, committee_));
  auto m1 = make_message(HeaderMsg{firstp});
  auto m2 = make_message(HeaderMsg{second});
  size_t k = 0;
  for (AuthorityIndex i = 0; i < committee_.size(); ++i) {
    if (i == self_) continue;
    io_.send(i, (k++ % 2 == 0) ? m1 : m2, first.round());
  }
  Vote v{second->digest(), second->round(), self_, self_, {}};
  v.signature = key_.sign(v.message());
  process_vote(v);
}

void Primary::maybe_propose() {
  if (!proposal_due_round_) return;
  if (*proposal_due_round_ != round_) {
    proposal_due_round_.reset();
    return;
  }
  if (pending_payload_.size() >= config_.header_batches || io_.now() >= proposal_deadline_) {
    Round r = *proposal_due_round_;
    proposal_due_round_.reset();
    propose(r);
  }
}

void Primary::advance_to(Round r) {
  round_ = r;
  for (WorkerId w = 0; w < committee_.authority(self_).worker_addrs.size(); ++w) {
    io_.send_to_worker(w, make_message(RoundUpdateMsg{round_, gc_round_}));
  }
  if (config_.byzantine == ByzantineMode::kMute) return;
  if (config_.max_header_delay_us <= 0) {
    propose(r);
  } else {
    proposal_due_round_ = r;
    proposal_deadline_ = io_.now() + config_.max_header_delay_us;
    maybe_propose();
  }
}

std::optional<Round> Primary::try_advance_round() {
  std::optional<Round> target;
  for (auto it = dag_.rbegin(); it != dag_.rend() && it->first >= round_; ++it) {
    if (it->second.size() >= committee_.quorum()) {
      target = it->first + 1;
      break;
    }
  }
  if (!target) return std::nullopt;
  advance_to(*target);
  recheck_pending_headers();
  return target;
}

void Primary::send_vote(const BlockHeader& h) {
  if (config_.byzantine == ByzantineMode::kSelectiveVoter && h.author() != self_ &&
      (h.author() % 2) != (self_ % 2)) {
    return;
  }
  Vote v{h.digest(), h.round(), h.author(), self_, {}};
  v.signature = key_.sign(v.message());
  votes_issued_[h.round()][h.author()] = v;
  if (h.author() == self_) {
    process_vote(v);
  } else {
    ++metrics_.votes_sent;
    io_.send(h.author(), make_message(VoteMsg{v}), h.round());
  }
}

void Primary::process_header(HeaderPtr header) {
  const BlockHeader& h = *header;
  if (h.author() >= committee_.size() || !verify(committee_.key(h.author()), h.digest(), h.signature())) {
    ++metrics_.invalid_messages;
    return;
  }
  if (collected(h.round()) || h.round() < round_) {
    ++metrics_.stale_headers;
    return;
  }
  if (h.round() == 0 ? !h.parents().empty() : h.parents().size() < committee_.quorum()) {
    ++metrics_.invalid_messages;
    return;
  }
  {
    std::set<Digest> uniq(h.parents().begin(), h.parents().end());
    if (uniq.size() != h.parents().size()) {
      ++metrics_.invalid_messages;
      return;
    }
  }
  size_t workers = committee_.authority(h.author()).worker_addrs.size();
  for (const auto& b : h.payload()) {
    if (b.worker_id >= workers) {
      ++metrics_.invalid_messages;
      return;
    }
  }

  auto& seen = first_seen_[h.round()];
  auto it = seen.find(h.author());
  if (it != seen.end()) {
    if (it->second != h.digest()) ++metrics_.equivocations_detected;
    return;
  }
  seen.emplace(h.author(), h.digest());
  store_.write(header);
  wake(h.digest());

  PendingHeader p{header, false};
  if (!recheck_header(p)) pending_headers_.emplace(h.digest(), std::move(p));
}

bool Primary::recheck_header(PendingHeader& p) {
  const BlockHeader& h = *p.header;
  if (h.round() < round_ || collected(h.round())) {
    ++metrics_.stale_headers;
    return true;
  }
  auto voted = votes_issued_.find(h.round());
  if (voted != votes_issued_.end() && voted->second.count(h.author())) return true;

  // Parents: must all be in the local DAG at round - 1 with distinct authors.
  if (h.round() > 0) {
    std::vector<Digest> missing;
    std::set<AuthorityIndex> authors;
    bool bad = false;
    for (const auto& d : h.parents()) {
      auto di = dag_index_.find(d);
      if (di == dag_index_.end()) {
        if (!suspended_.count(d)) missing.push_back(d);
        continue;
      }
      if (di->second != h.round() - 1) {
        bad = true;
        break;
      }
      auto c = store_.read_certificate(d);
      if (!authors.insert(c->author()).second) {
        bad = true;
        break;
      }
    }
    if (bad) {
      ++metrics_.invalid_messages;
      return true;
    }
    if (!missing.empty() || authors.size() < h.parents().size()) {
      if (!missing.empty()) synchronize(missing, others_first(h.author()), h.round());
      return false;
    }
  }

  if (h.author() != self_) {
    std::map<WorkerId, std::vector<Digest>> missing;
    for (const auto& b : h.payload()) {
      if (!available_batches_.count(b.digest)) missing[b.worker_id].push_back(b.digest);
    }
    if (!missing.empty()) {
      if (!p.batches_requested) {
        p.batches_requested = true;
        for (auto& [w, ds] : missing) {
          io_.send_to_worker(w, make_message(SynchronizeMsg{std::move(ds), others_first(h.author()), h.round()}));
        }
      }
      return false;
    }
  }

  if (h.round() > round_) return false;
  send_vote(h);
  return true;
}

void Primary::recheck_pending_headers() {
  for (auto it = pending_headers_.begin(); it != pending_headers_.end();) {
    if (recheck_header(it->second)) {
      it = pending_headers_.erase(it);
    } else {
      ++it;
    }
  }
}

void Primary::process_vote(const Vote& vote) {
  auto it = aggregators_.find(vote.header_digest);
  if (it == aggregators_.end()) return;
  auto cert = it->second.append(vote);
  if (!cert) return;
  ++metrics_.certificates_formed;
  auto ptr = std::make_shared<const Certificate>(std::move(*cert));
  broadcast(make_message(CertificateMsg{ptr}), ptr->round() + 1);
  process_certificate(ptr);
}

void Primary::process_certificate(CertificatePtr cert) {
  cert_queue_.push_back(std::move(cert));
  if (draining_) return;
  drain_certificates();
}

void Primary::drain_certificates() {
  draining_ = true;
  bool any = false;
  while (!cert_queue_.empty()) {
    CertificatePtr cert = std::move(cert_queue_.back());
    cert_queue_.pop_back();
    const Digest& d = cert->digest();
    if (collected(cert->round()) || dag_index_.count(d) || suspended_.count(d)) continue;
    if (!store_.read_certificate(d)) {
      if (!verify_certificate(*cert, committee_)) {
        ++metrics_.invalid_messages;
        continue;
      }
      if (store_.write_certificate(cert) == CertificateWrite::kConflict) {
        ++metrics_.conflicting_certificates;
        continue;
      }
    }
    any |= try_accept(cert);
  }
  draining_ = false;
  if (any) {
    try_advance_round();
    recheck_pending_headers();
  }
}

bool Primary::try_accept(const CertificatePtr& cert) {
  const Digest& d = cert->digest();
  std::set<Digest> waiting;
  std::vector<Digest> to_sync;
  HeaderPtr h = store_.read_header(cert->header_digest());
  if (!h) {
    waiting.insert(cert->header_digest());
    to_sync.push_back(d);
  } else {
    if (h->author() != cert->author() || h->round() != cert->round()) {
      ++metrics_.invalid_messages;
      return false;
    }
    if (!collected(cert->round() - 1) && cert->round() > 0) {
      for (const auto& p : h->parents()) {
        if (dag_index_.count(p)) continue;
        waiting.insert(p);
        if (!suspended_.count(p)) to_sync.push_back(p);
      }
    }
  }

  if (!waiting.empty()) {
    for (const auto& w : waiting) waiters_[w].push_back(d);
    suspended_[d] = Suspended{cert, std::move(waiting)};
    if (!to_sync.empty()) {
      std::vector<AuthorityIndex> cands = others_first(cert->author());
      std::vector<AuthorityIndex> ordered;
      if (cert->author() != self_) ordered.push_back(cert->author());
      for (const auto& v : cert->votes()) {
        if (v.voter != self_ && v.voter != cert->author()) ordered.push_back(v.voter);
      }
      if (ordered.empty()) ordered = cands;
      synchronize(to_sync, ordered, cert->round());
    }
    return false;
  }

  // Accept, then wake anything that was waiting on it.
  std::vector<CertificatePtr> work{cert};
  while (!work.empty()) {
    CertificatePtr c = std::move(work.back());
    work.pop_back();
    const Digest& cd = c->digest();
    suspended_.erase(cd);
    syncing_.erase(cd);
    dag_[c->round()][c->author()] = c;
    dag_index_[cd] = c->round();
    accepted_.push_back(c);
    ++metrics_.certificates_accepted;

    auto wit = waiters_.find(cd);
    if (wit == waiters_.end()) continue;
    std::vector<Digest> ws = std::move(wit->second);
    waiters_.erase(wit);
    for (const auto& w : ws) {
      auto s = suspended_.find(w);
      if (s == suspended_.end()) continue;
      s->second.waiting_on.erase(cd);
      if (s->second.waiting_on.empty()) {
        CertificatePtr next = s->second.cert;
        suspended_.erase(s);
        cert_queue_.push_back(next);
      }
    }
  }
  return true;
}

void Primary::wake(const Digest& d) {
  auto wit = waiters_.find(d);
  if (wit == waiters_.end()) return;
  std::vector<Digest> ws = std::move(wit->second);
  waiters_.erase(wit);
  for (const auto& w : ws) {
    auto s = suspended_.find(w);
    if (s == suspended_.end()) continue;
    s->second.waiting_on.erase(d);
    if (s->second.waiting_on.empty()) {
      CertificatePtr next = s->second.cert;
      suspended_.erase(s);
      cert_queue_.push_back(next);
    }
  }
  if (!draining_ && !cert_queue_.empty()) drain_certificates();
}

void Primary::synchronize(const std::vector<Digest>& missing, const std::vector<AuthorityIndex>& candidates,
                          Round trigger_round) {
  if (candidates.empty()) return;
  std::map<AuthorityIndex, std::vector<Digest>> out;
  TimeUs now = io_.now();
  for (const auto& d : missing) {
    auto [it, fresh] = syncing_.try_emplace(d);
    SyncState& s = it->second;
    if (!fresh) {
      s.trigger_round = std::max(s.trigger_round, trigger_round);
      continue;
    }
    s.candidates = candidates;
    s.trigger_round = trigger_round;
    s.last_sent = now;
    size_t k = std::min(config_.sync_fanout, s.candidates.size());
    for (size_t i = 0; i < k; ++i) out[s.candidates[(s.next + i) % s.candidates.size()]].push_back(d);
    s.next = (s.next + k) % s.candidates.size();
  }
  for (auto& [to, ds] : out) {
    ++metrics_.sync_requests_sent;
    io_.send(to, make_message(SyncRequestMsg{self_, std::move(ds)}), round_);
  }
}

void Primary::send_sync_request(const Digest& d, SyncState& s) {
  size_t k = std::min(config_.sync_fanout, s.candidates.size());
  for (size_t i = 0; i < k; ++i) {
    ++metrics_.sync_requests_sent;
    io_.send(s.candidates[(s.next + i) % s.candidates.size()], make_message(SyncRequestMsg{self_, {d}}), round_);
  }
  s.next = (s.next + k) % s.candidates.size();
  s.last_sent = io_.now();
}

void Primary::handle_sync_request(const SyncRequestMsg& m) {
  if (m.requester >= committee_.size() || m.requester == self_) return;
  SyncReplyMsg reply;
  for (const auto& d : m.digests) {
    auto c = store_.read_certificate(d);
    if (!c) continue;
    auto h = store_.read_header(c->header_digest());
    if (!h) continue;
    reply.items.push_back({c, h});
  }
  if (!reply.items.empty()) io_.send(m.requester, make_message(std::move(reply)), kNeverCancel);
}

void Primary::handle_sync_reply(const SyncReplyMsg& m) {
  for (const auto& item : m.items) {
    if (!item.certificate || !item.header || item.header->digest() != item.certificate->header_digest()) {
      ++metrics_.sync_replies_discarded;
      continue;
    }
    const Certificate& c = *item.certificate;
    if (collected(c.round())) continue;
    if (!store_.read_certificate(c.digest())) {
      if (!verify_certificate(c, committee_)) {
        ++metrics_.sync_replies_discarded;
        continue;
      }
    }
    // Certified, so the header is authentic without its own signature check.
    store_.write(item.header);
    draining_ = true;
    wake(item.header->digest());
    draining_ = false;
    process_certificate(item.certificate);
  }
}

void Primary::note_batch(const Digest& d) {
  available_batches_.emplace(d, round_);
  bool waiting = false;
  for (auto& [hd, p] : pending_headers_) {
    if (p.batches_requested) {
      waiting = true;
      break;
    }
  }
  if (waiting) recheck_pending_headers();
}

void Primary::handle(const Message& msg) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HeaderMsg>) {
          if (m.header) process_header(m.header);
        } else if constexpr (std::is_same_v<T, VoteMsg>) {
          process_vote(m.vote);
        } else if constexpr (std::is_same_v<T, CertificateMsg>) {
          if (m.certificate) process_certificate(m.certificate);
        } else if constexpr (std::is_same_v<T, SyncRequestMsg>) {
          handle_sync_request(m);
        } else if constexpr (std::is_same_v<T, SyncReplyMsg>) {
          handle_sync_reply(m);
        } else if constexpr (std::is_same_v<T, OurBatchMsg>) {
          available_batches_.emplace(m.digest, round_);
          pending_payload_.push_back({m.digest, m.worker_id});
          maybe_propose();
        } else if constexpr (std::is_same_v<T, OthersBatchMsg>) {
          note_batch(m.digest);
        } else {
          ++metrics_.invalid_messages;
        }
      },
      msg);
}

void Primary::on_tick() {
  maybe_propose();
  TimeUs now = io_.now();
  for (auto it = syncing_.begin(); it != syncing_.end();) {
    SyncState& s = it->second;
    if (dag_index_.count(it->first) || collected(s.trigger_round)) {
      it = syncing_.erase(it);
      continue;
    }
    if (now - s.last_sent >= config_.sync_timeout_us) send_sync_request(it->first, s);
    ++it;
  }
}

void Primary::on_committed(const std::vector<HeaderPtr>& headers) {
  for (const auto& h : headers) {
    if (h->author() != self_) continue;
    auto it = own_headers_.find(h->round());
    if (it != own_headers_.end() && it->second.header->digest() == h->digest()) it->second.committed = true;
  }
}

void Primary::garbage_collect(Round gc) {
  if (gc_round_ && gc <= *gc_round_) return;
  gc_round_ = gc;
  store_.set_watermark(gc);

  auto cut = [gc](auto& m) { m.erase(m.begin(), m.upper_bound(gc)); };
  for (auto it = dag_.begin(); it != dag_.end() && it->first <= gc; ++it) {
    for (const auto& [a, c] : it->second) dag_index_.erase(c->digest());
  }
  cut(dag_);
  cut(first_seen_);
  cut(votes_issued_);

  std::vector<BatchRef> reinject;
  for (auto it = own_headers_.begin(); it != own_headers_.end() && it->first <= gc; ++it) {
    if (it->second.committed) continue;
    for (const auto& b : it->second.header->payload()) reinject.push_back(b);
  }
  cut(own_headers_);
  if (!reinject.empty()) {
    metrics_.reinjected_batches += reinject.size();
    reinjected_log_.insert(reinjected_log_.end(), reinject.begin(), reinject.end());
    pending_payload_.insert(pending_payload_.begin(), reinject.begin(), reinject.end());
  }

  std::erase_if(pending_headers_, [&](const auto& kv) { return kv.second.header->round() <= gc; });
  std::erase_if(aggregators_, [&](const auto& kv) { return kv.second.header()->round() <= gc; });
  std::erase_if(syncing_, [&](const auto& kv) { return kv.second.trigger_round <= gc; });
  std::erase_if(available_batches_, [&](const auto& kv) { return kv.second <= gc; });

  std::vector<CertificatePtr> retry;
  for (auto it = suspended_.begin(); it != suspended_.end();) {
    if (it->second.cert->round() <= gc) {
      it = suspended_.erase(it);
    } else {
      retry.push_back(it->second.cert);
      ++it;
    }
  }
  waiters_.clear();
  suspended_.clear();

  for (WorkerId w = 0; w < committee_.authority(self_).worker_addrs.size(); ++w) {
    io_.send_to_worker(w, make_message(RoundUpdateMsg{round_, gc_round_}));
  }
  // Parents may now be below the watermark.
  for (auto& c : retry) cert_queue_.push_back(std::move(c));
  if (!draining_ && !cert_queue_.empty()) drain_certificates();
}

std::vector<CertificatePtr> Primary::take_accepted() {
  std::vector<CertificatePtr> out;
  out.swap(accepted_);
  return out;
}

size_t Primary::hot_rounds() const {
  std::set<Round> rounds;
  for (const auto& [r, _] : dag_) rounds.insert(r);
  for (const auto& [r, _] : first_seen_) rounds.insert(r);
  for (const auto& [r, _] : votes_issued_) rounds.insert(r);
  for (const auto& [r, _] : own_headers_) rounds.insert(r);
  for (const auto& [d, p] : pending_headers_) rounds.insert(p.header->round());
  for (const auto& [d, a] : aggregators_) rounds.insert(a.header()->round());
  return rounds.size();
}

size_t Primary::certificates_at(Round r) const {
  auto it = dag_.find(r);
  return it == dag_.end() ? 0 : it->second.size();
}

bool Primary::has_voted(Round round, AuthorityIndex author) const {
  auto it = votes_issued_.find(round);
  return it != votes_issued_.end() && it->second.count(author) > 0;
}

}  // namespace dagpool
