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

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dagpool/committee.hpp"
#include "dagpool/crypto.hpp"
#include "dagpool/messages.hpp"
#include "dagpool/store.hpp"
#include "dagpool/types.hpp"

namespace dagpool {

// Virtual or wall-clock time in microseconds.
using TimeUs = int64_t;

enum class ByzantineMode {
  kHonest,
  kEquivocator,     // two headers per round, split between peers
  kMute,            // never proposes
  kSelectiveVoter,  // only votes for authors with the same ordinal parity
};

const char* byzantine_name(ByzantineMode m);

struct PrimaryConfig {
  // Pull retry: rotate to the next signer after this long without a reply.
  TimeUs sync_timeout_us = 250'000;
  // Signers asked in parallel for one missing digest.
  size_t sync_fanout = 1;
  // After advancing, wait up to this long for payload before proposing.
  // Zero proposes immediately.
  TimeUs max_header_delay_us = 0;
  // Propose early once this many batch digests are pending.
  size_t header_batches = 1;
  ByzantineMode byzantine = ByzantineMode::kHonest;
};

// Effects the primary asks of its environment.
class PrimaryIo {
 public:
  virtual ~PrimaryIo() = default;
  // The message may be dropped once the sender's round exceeds cancel_round.
  virtual void send(AuthorityIndex to, MessagePtr msg, Round cancel_round) = 0;
  virtual void send_to_worker(WorkerId worker, MessagePtr msg) = 0;
  virtual TimeUs now() const = 0;
};

struct PrimaryMetrics {
  uint64_t headers_proposed = 0;
  uint64_t votes_sent = 0;
  uint64_t certificates_formed = 0;
  uint64_t certificates_accepted = 0;
  uint64_t equivocations_detected = 0;
  uint64_t conflicting_certificates = 0;
  uint64_t invalid_messages = 0;
  uint64_t stale_headers = 0;
  uint64_t sync_requests_sent = 0;
  uint64_t sync_replies_discarded = 0;
  uint64_t reinjected_batches = 0;
};

// Collects votes for one header and forms the certificate at exactly
// quorum distinct valid voters.
class VotesAggregator {
 public:
  VotesAggregator(HeaderPtr header, const Committee& committee);

  // Returns the certificate on the vote that completes the quorum.
  std::optional<Certificate> append(const Vote& vote);

  const HeaderPtr& header() const { return header_; }
  size_t size() const { return votes_.size(); }

 private:
  HeaderPtr header_;
  const Committee& committee_;
  std::set<AuthorityIndex> voters_;
  std::vector<VoteSignature> votes_;
  bool done_ = false;
};

// Checks 2f+1 distinct committee voters with valid signatures.
bool verify_certificate(const Certificate& cert, const Committee& committee);

// Round-0 header, identical for every validator with the same ordinal.
BlockHeader genesis_header(AuthorityIndex author);

// One validator's primary: round advancement, header proposal, voting,
// certificate aggregation, pull-based synchronization and garbage
// collection. Single-threaded; every entry point must be called from the
// same logical thread.
class Primary {
 public:
  Primary(AuthorityIndex self, const Committee& committee, const KeyPair& key, BlockStore& store,
          PrimaryIo& io, PrimaryConfig config = {});

  // Proposes the genesis header.
  void start();
  void handle(const Message& msg);
  void on_tick();

  // Consensus feedback.
  void on_committed(const std::vector<HeaderPtr>& headers);
  void garbage_collect(Round gc_round);

  // Certificates accepted into the local DAG since the last call, in
  // acceptance order. Each has its header stored and every parent above the
  // GC round already accepted.
  std::vector<CertificatePtr> take_accepted();

  // Protocol steps, public for tests.
  std::optional<Round> try_advance_round();
  void process_certificate(CertificatePtr cert);
  void process_header(HeaderPtr header);
  void process_vote(const Vote& vote);
  void synchronize(const std::vector<Digest>& missing, const std::vector<AuthorityIndex>& candidates,
                   Round trigger_round);

  AuthorityIndex index() const { return self_; }
  Round round() const { return round_; }
  std::optional<Round> gc_round() const { return gc_round_; }
  // Distinct rounds holding live working state.
  size_t hot_rounds() const;
  const PrimaryMetrics& metrics() const { return metrics_; }
  ByzantineMode byzantine() const { return config_.byzantine; }

  bool in_dag(const Digest& cert_digest) const { return dag_index_.count(cert_digest) > 0; }
  size_t certificates_at(Round r) const;
  bool has_voted(Round round, AuthorityIndex author) const;
  size_t pending_payload() const { return pending_payload_.size(); }
  size_t pending_syncs() const { return syncing_.size(); }
  size_t suspended_certificates() const { return suspended_.size(); }
  const HeaderPtr& last_proposed() const { return last_proposed_; }
  // Every batch reference put back into the payload queue by GC.
  const std::vector<BatchRef>& reinjected() const { return reinjected_log_; }

 private:
  struct PendingHeader {
    HeaderPtr header;
    bool batches_requested = false;
  };
  struct Suspended {
    CertificatePtr cert;
    std::set<Digest> waiting_on;
  };
  struct SyncState {
    std::vector<AuthorityIndex> candidates;
    size_t next = 0;
    TimeUs last_sent = 0;
    Round trigger_round = 0;
  };
  struct OwnHeader {
    HeaderPtr header;
    bool committed = false;
  };

  bool collected(Round r) const { return gc_round_ && r <= *gc_round_; }
  void broadcast(const MessagePtr& msg, Round cancel_round);
  void propose(Round round);
  void maybe_propose();
  void equivocate(const BlockHeader& first);
  void advance_to(Round r);
  void send_vote(const BlockHeader& header);
  // True once the header is voted for or can be discarded.
  bool recheck_header(PendingHeader& p);
  std::vector<AuthorityIndex> others_first(AuthorityIndex first) const;
  void recheck_pending_headers();
  void drain_certificates();
  bool try_accept(const CertificatePtr& cert);
  void wake(const Digest& d);
  void send_sync_request(const Digest& d, SyncState& s);
  void handle_sync_request(const SyncRequestMsg& m);
  void handle_sync_reply(const SyncReplyMsg& m);
  void note_batch(const Digest& d);

  const AuthorityIndex self_;
  const Committee& committee_;
  const KeyPair& key_;
  BlockStore& store_;
  PrimaryIo& io_;
  const PrimaryConfig config_;

  Round round_ = 0;
  std::optional<Round> gc_round_;
  bool started_ = false;
  bool draining_ = false;
  std::optional<Round> proposal_due_round_;
  TimeUs proposal_deadline_ = 0;

  // Local DAG working set: accepted certificates per round, by author.
  std::map<Round, std::map<AuthorityIndex, CertificatePtr>> dag_;
  std::unordered_map<Digest, Round> dag_index_;
  // First header digest received per (round, author) and the vote issued.
  std::map<Round, std::map<AuthorityIndex, Digest>> first_seen_;
  std::map<Round, std::map<AuthorityIndex, Vote>> votes_issued_;
  std::map<Digest, PendingHeader> pending_headers_;

  std::vector<CertificatePtr> cert_queue_;
  std::map<Digest, Suspended> suspended_;
  std::unordered_map<Digest, std::vector<Digest>> waiters_;
  std::map<Digest, SyncState> syncing_;

  std::map<Digest, VotesAggregator> aggregators_;
  HeaderPtr last_proposed_;
  std::vector<BatchRef> pending_payload_;
  std::unordered_map<Digest, Round> available_batches_;
  std::map<Round, OwnHeader> own_headers_;
  std::vector<CertificatePtr> accepted_;
  std::vector<BatchRef> reinjected_log_;

  PrimaryMetrics metrics_;
};

}  // namespace dagpool
