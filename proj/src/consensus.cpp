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

#include "dagpool/consensus.hpp"

#include <algorithm>

namespace dagpool {

Consensus::Consensus(const Committee& committee, const CoinSource& coin, Round gc_depth)
    : committee_(committee), coin_(coin), gc_depth_(gc_depth) {}

std::vector<CommitEvent> Consensus::add(const CertificatePtr& cert, const HeaderPtr& header) {
  std::vector<CommitEvent> out;
  Round r = cert->round();
  if (gc_round_ && r <= *gc_round_) return out;
  if (index_.count(cert->digest())) return out;
  auto& row = dag_[r];
  auto [it, fresh] = row.try_emplace(cert->author(), Vertex{cert, header});
  if (!fresh) return out;
  index_[cert->digest()] = &it->second;

  // A wave is evaluated once, when its coin round first holds a quorum.
  if (row.size() == committee_.quorum() && r >= 3 && r % 2 == 1) {
    Wave w = (r - 1) / 2;
    if (w > decided_wave_) evaluate(w, out);
  }
  return out;
}

const CertificatePtr* Consensus::leader(Wave w) const {
  AuthorityIndex who = coin_flip(coin_, w, committee_);
  auto row = dag_.find(proposal_round(w));
  if (row == dag_.end()) return nullptr;
  auto it = row->second.find(who);
  return it == row->second.end() ? nullptr : &it->second.cert;
}

size_t Consensus::support(const Digest& leader, Round vote_round) const {
  auto row = dag_.find(vote_round);
  if (row == dag_.end()) return 0;
  size_t n = 0;
  for (const auto& [a, v] : row->second) {
    const auto& ps = v.header->parents();
    if (std::find(ps.begin(), ps.end(), leader) != ps.end()) ++n;
  }
  return n;
}

bool Consensus::path(const Digest& from, const Digest& to) const {
  auto target = index_.find(to);
  auto start = index_.find(from);
  if (target == index_.end() || start == index_.end()) return false;
  Round floor = target->second->cert->round();
  std::vector<const Vertex*> stack{start->second};
  std::unordered_set<Digest> seen{from};
  while (!stack.empty()) {
    const Vertex* v = stack.back();
    stack.pop_back();
    if (v->cert->digest() == to) return true;
    if (v->cert->round() <= floor) continue;
    for (const auto& p : v->header->parents()) {
      auto it = index_.find(p);
      if (it == index_.end() || !seen.insert(p).second) continue;
      if (it->second->cert->round() >= floor) stack.push_back(it->second);
    }
  }
  return false;
}

void Consensus::evaluate(Wave w, std::vector<CommitEvent>& out) {
  WaveOutcome o;
  o.wave = w;
  o.leader = coin_flip(coin_, w, committee_);
  Round pr = proposal_round(w);
  Round vr = vote_round(w);
  if (auto row = dag_.find(pr); row != dag_.end()) {
    o.proposal_certificates = row->second.size();
    for (const auto& [a, v] : row->second) {
      if (support(v.cert->digest(), vr) >= committee_.validity()) ++o.committable;
    }
  }
  if (auto row = dag_.find(vr); row != dag_.end()) o.vote_certificates = row->second.size();

  const CertificatePtr* lp = leader(w);
  if (lp != nullptr) {
    o.leader_present = true;
    o.support = support((*lp)->digest(), vr);
    o.committed_directly = o.support >= committee_.validity();
  }
  outcomes_.push_back(o);
  if (!o.committed_directly) return;

  // Walk back to the last decided wave, keeping leaders reachable from the
  // most recently kept one.
  std::vector<std::pair<Wave, CertificatePtr>> stack{{w, *lp}};
  for (Wave v = w - 1; v > decided_wave_; --v) {
    if (gc_round_ && proposal_round(v) <= *gc_round_) break;
    const CertificatePtr* prev = leader(v);
    if (prev == nullptr) continue;
    if (path(stack.back().second->digest(), (*prev)->digest())) stack.emplace_back(v, *prev);
  }
  decided_wave_ = w;
  while (!stack.empty()) {
    auto [v, l] = stack.back();
    stack.pop_back();
    out.push_back(linearize(v, l));
  }
  prune();
}

CommitEvent Consensus::linearize(Wave w, const CertificatePtr& leader) {
  CommitEvent ev;
  ev.wave = w;
  ev.leader = leader;
  std::vector<const Vertex*> found;
  std::vector<const Vertex*> stack{index_.at(leader->digest())};
  std::unordered_set<Digest> seen{leader->digest()};
  while (!stack.empty()) {
    const Vertex* v = stack.back();
    stack.pop_back();
    if (gc_round_ && v->cert->round() <= *gc_round_) continue;
    if (emitted_.count(v->cert->digest())) continue;
    found.push_back(v);
    for (const auto& p : v->header->parents()) {
      auto it = index_.find(p);
      if (it != index_.end() && seen.insert(p).second) stack.push_back(it->second);
    }
  }
  std::sort(found.begin(), found.end(), [](const Vertex* a, const Vertex* b) {
    return std::pair(a->cert->round(), a->cert->author()) < std::pair(b->cert->round(), b->cert->author());
  });
  for (const Vertex* v : found) {
    emitted_.insert(v->cert->digest());
    ev.headers.push_back(v->header);
  }
  ++committed_leaders_;
  if (leader->round() > gc_depth_) {
    Round g = leader->round() - gc_depth_;
    if (!gc_round_ || g > *gc_round_) gc_round_ = g;
  }
  ev.gc_round = gc_round_;
  return ev;
}

void Consensus::prune() {
  if (!gc_round_) return;
  for (auto it = dag_.begin(); it != dag_.end() && it->first <= *gc_round_;) {
    for (const auto& [a, v] : it->second) {
      index_.erase(v.cert->digest());
      emitted_.erase(v.cert->digest());
    }
    it = dag_.erase(it);
  }
}

std::vector<WaveOutcome> Consensus::take_outcomes() {
  std::vector<WaveOutcome> out;
  out.swap(outcomes_);
  return out;
}

}  // namespace dagpool
