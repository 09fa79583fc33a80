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
#include <vector>

#include "dagpool/committee.hpp"
#include "dagpool/crypto.hpp"
#include "dagpool/messages.hpp"
#include "dagpool/primary.hpp"
#include "dagpool/worker.hpp"

namespace dagpool::testing {

// Builds signed, certified DAGs by hand.
class DagBuilder {
 public:
  explicit DagBuilder(size_t n, uint64_t seed = 0)
      : committee(Committee::for_test(n, seed)), keys(test_keypairs(n, seed)) {}

  struct Node {
    HeaderPtr header;
    CertificatePtr cert;
  };

  Node make(AuthorityIndex author, Round round, const std::vector<Digest>& parents,
            std::vector<BatchRef> payload = {}) {
    BlockHeader u(author, round, std::move(payload), parents);
    auto h = std::make_shared<const BlockHeader>(u.with_signature(keys[author].sign(u.digest())));
    std::vector<VoteSignature> votes;
    Digest msg = vote_message(h->digest(), round, author);
    for (AuthorityIndex v = 0; votes.size() < committee.quorum(); ++v) votes.push_back({v, keys[v].sign(msg)});
    auto c = std::make_shared<const Certificate>(h->digest(), round, author, std::move(votes));
    Node node{h, c};
    nodes[c->digest()] = node;
    rounds[round][author] = node;
    return node;
  }

  void genesis() {
    for (AuthorityIndex a = 0; a < committee.size(); ++a) make(a, 0, {});
  }

  // Each listed author references the certificates chosen by `pick` (all of
  // the previous round by default).
  void add_round(Round r, const std::vector<AuthorityIndex>& authors,
                 const std::function<std::vector<AuthorityIndex>(AuthorityIndex)>& pick = nullptr) {
    for (AuthorityIndex a : authors) {
      std::vector<Digest> parents;
      const auto& prev = rounds.at(r - 1);
      if (pick) {
        for (AuthorityIndex p : pick(a)) parents.push_back(prev.at(p).cert->digest());
      } else {
        for (const auto& [p, node] : prev) parents.push_back(node.cert->digest());
      }
      make(a, r, parents);
    }
  }

  void full_rounds(Round last) {
    if (rounds.empty()) genesis();
    std::vector<AuthorityIndex> all;
    for (AuthorityIndex a = 0; a < committee.size(); ++a) all.push_back(a);
    for (Round r = rounds.rbegin()->first + 1; r <= last; ++r) add_round(r, all);
  }

  const Node& at(Round r, AuthorityIndex a) const { return rounds.at(r).at(a); }

  // Certified headers for rounds [from, to] in round order, as one reply.
  SyncReplyMsg reply(Round from, Round to) const {
    SyncReplyMsg m;
    for (auto it = rounds.lower_bound(from); it != rounds.end() && it->first <= to; ++it) {
      for (const auto& [a, node] : it->second) m.items.push_back({node.cert, node.header});
    }
    return m;
  }

  Committee committee;
  std::vector<KeyPair> keys;
  std::map<Digest, Node> nodes;
  std::map<Round, std::map<AuthorityIndex, Node>> rounds;
};

struct RecordingPrimaryIo final : PrimaryIo {
  struct Sent {
    AuthorityIndex to;
    MessagePtr msg;
    Round cancel;
  };
  std::vector<Sent> sent;
  std::vector<std::pair<WorkerId, MessagePtr>> to_workers;
  TimeUs time = 0;

  void send(AuthorityIndex to, MessagePtr msg, Round cancel) override { sent.push_back({to, std::move(msg), cancel}); }
  void send_to_worker(WorkerId w, MessagePtr msg) override { to_workers.emplace_back(w, std::move(msg)); }
  TimeUs now() const override { return time; }

  template <typename T>
  std::vector<Sent> of() const {
    std::vector<Sent> out;
    for (const auto& s : sent) {
      if (std::holds_alternative<T>(*s.msg)) out.push_back(s);
    }
    return out;
  }
  template <typename T>
  std::vector<T> worker_msgs() const {
    std::vector<T> out;
    for (const auto& [w, m] : to_workers) {
      if (const auto* x = std::get_if<T>(m.get())) out.push_back(*x);
    }
    return out;
  }
  void clear() {
    sent.clear();
    to_workers.clear();
  }
};

struct RecordingWorkerIo final : WorkerIo {
  struct Sent {
    AuthorityIndex to;
    MessagePtr msg;
    Round cancel;
  };
  std::vector<Sent> sent;
  std::vector<MessagePtr> to_primary;
  TimeUs time = 0;

  void send(AuthorityIndex to, MessagePtr msg, Round cancel) override { sent.push_back({to, std::move(msg), cancel}); }
  void send_to_primary(MessagePtr msg) override { to_primary.push_back(std::move(msg)); }
  TimeUs now() const override { return time; }

  template <typename T>
  std::vector<Sent> of() const {
    std::vector<Sent> out;
    for (const auto& s : sent) {
      if (std::holds_alternative<T>(*s.msg)) out.push_back(s);
    }
    return out;
  }
  template <typename T>
  std::vector<T> primary_msgs() const {
    std::vector<T> out;
    for (const auto& m : to_primary) {
      if (const auto* x = std::get_if<T>(m.get())) out.push_back(*x);
    }
    return out;
  }
  void clear() {
    sent.clear();
    to_primary.clear();
  }
};

}  // namespace dagpool::testing
