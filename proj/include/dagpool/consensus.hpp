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

#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dagpool/committee.hpp"
#include "dagpool/crypto.hpp"
#include "dagpool/types.hpp"

namespace dagpool {

// What one validator saw when it evaluated a wave.
struct WaveOutcome {
  Wave wave = 0;
  AuthorityIndex leader = 0;
  bool leader_present = false;
  // Vote-round certificates with a direct parent edge to the leader.
  size_t support = 0;
  bool committed_directly = false;
  // Proposal-round certificates that would have met the support threshold.
  size_t committable = 0;
  size_t proposal_certificates = 0;
  size_t vote_certificates = 0;
};

struct CommitEvent {
  // Wave whose leader this is (not necessarily the wave that triggered it).
  Wave wave = 0;
  CertificatePtr leader;
  // Newly ordered headers, by (round, author).
  std::vector<HeaderPtr> headers;
  // Watermark after this commit.
  std::optional<Round> gc_round;
};

// Orders the local DAG. Fed certificates in causal order; sends nothing.
class Consensus {
 public:
  Consensus(const Committee& committee, const CoinSource& coin, Round gc_depth);

  // `header` is the header `cert` certifies. Every parent above the
  // watermark must have been added already.
  std::vector<CommitEvent> add(const CertificatePtr& cert, const HeaderPtr& header);

  Wave decided_wave() const { return decided_wave_; }
  std::optional<Round> gc_round() const { return gc_round_; }
  Round gc_depth() const { return gc_depth_; }
  uint64_t committed_leaders() const { return committed_leaders_; }
  std::vector<WaveOutcome> take_outcomes();
  size_t hot_rounds() const { return dag_.size(); }
  size_t vertex_count() const { return index_.size(); }

  // Exposed for tests.
  const CertificatePtr* leader(Wave w) const;
  size_t support(const Digest& leader, Round vote_round) const;
  bool path(const Digest& from, const Digest& to) const;

 private:
  struct Vertex {
    CertificatePtr cert;
    HeaderPtr header;
  };

  void evaluate(Wave w, std::vector<CommitEvent>& out);
  CommitEvent linearize(Wave w, const CertificatePtr& leader);
  void prune();

  const Committee& committee_;
  const CoinSource& coin_;
  const Round gc_depth_;

  std::map<Round, std::map<AuthorityIndex, Vertex>> dag_;
  std::unordered_map<Digest, const Vertex*> index_;
  std::unordered_set<Digest> emitted_;
  Wave decided_wave_ = 0;
  std::optional<Round> gc_round_;
  uint64_t committed_leaders_ = 0;
  std::vector<WaveOutcome> outcomes_;
};

}  // namespace dagpool
