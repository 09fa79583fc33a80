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

#include "dagpool/netsim.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <unordered_set>

#include "dagpool/workload.hpp"

namespace dagpool {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class EvType : uint8_t { kDeliver, kRetry, kTick, kClient, kCrash, kSample };

struct Event {
  TimeUs time = 0;
  uint64_t tie = 0;
  uint64_t seq = 0;
  EvType type = EvType::kTick;
  uint32_t a = 0;
  uint32_t b = 0;
  MessagePtr msg;
  Round cancel = 0;

  bool operator>(const Event& o) const {
    return std::tie(time, tie, seq) > std::tie(o.time, o.tie, o.seq);
  }
};

}  // namespace

const char* adversary_name(Adversary a) {
  switch (a) {
    case Adversary::kNone: return "none";
    case Adversary::kSupportMinimizer: return "support-minimizer";
    case Adversary::kLeaderIsolator: return "leader-isolator";
    case Adversary::kRoundStaller: return "round-staller";
  }
  return "?";
}

std::optional<Adversary> parse_adversary(const std::string& s) {
  for (auto a : {Adversary::kNone, Adversary::kSupportMinimizer, Adversary::kLeaderIsolator,
                 Adversary::kRoundStaller}) {
    if (s == adversary_name(a)) return a;
  }
  return std::nullopt;
}

std::vector<size_t> SimReport::honest_indices() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < validators.size(); ++i) {
    if (validators[i].honest()) out.push_back(i);
  }
  return out;
}

struct Simulator::Impl {
  struct PIo final : PrimaryIo {
    Impl* sim;
    AuthorityIndex v;
    PIo(Impl* s, AuthorityIndex i) : sim(s), v(i) {}
    void send(AuthorityIndex to, MessagePtr msg, Round cancel) override {
      sim->net_send(sim->ep(v, 0), sim->ep(to, 0), std::move(msg), cancel, false);
    }
    void send_to_worker(WorkerId w, MessagePtr msg) override {
      sim->local_send(sim->ep(v, 0), sim->ep(v, 1 + w), std::move(msg));
    }
    TimeUs now() const override { return sim->now; }
  };
  struct WIo final : WorkerIo {
    Impl* sim;
    AuthorityIndex v;
    WorkerId w;
    WIo(Impl* s, AuthorityIndex i, WorkerId j) : sim(s), v(i), w(j) {}
    void send(AuthorityIndex to, MessagePtr msg, Round cancel) override {
      sim->net_send(sim->ep(v, 1 + w), sim->ep(to, 1 + w), std::move(msg), cancel, false);
    }
    void send_to_primary(MessagePtr msg) override {
      sim->local_send(sim->ep(v, 1 + w), sim->ep(v, 0), std::move(msg));
    }
    TimeUs now() const override { return sim->now; }
  };

  SimConfig cfg;
  Committee committee;
  std::vector<KeyPair> keys;
  SeededCoin coin;
  size_t stride;
  std::vector<std::unique_ptr<PIo>> pio;
  std::vector<std::vector<std::unique_ptr<WIo>>> wio;
  std::vector<std::unique_ptr<Validator>> vals;
  std::vector<bool> crashed;
  std::vector<bool> ever_crashes;

  TimeUs now = 0;
  uint64_t seq = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;
  std::mt19937_64 rng;
  std::mt19937_64 adv_rng;
  std::vector<TimeUs> nic_free;
  std::vector<uint32_t> drops;
  bool stop = false;
  bool ran = false;

  SimReport rep;
  std::unordered_map<Digest, BatchPtr> batches;
  std::unordered_set<uint64_t> committed_ids;
  std::unordered_set<Digest> committed_batches;
  std::vector<std::unordered_set<Digest>> seen_batches;
  std::vector<std::vector<Digest>> reported;
  std::vector<uint32_t> client_seq;
  std::vector<double> client_acc;
  std::vector<Wave> evaluated;
  std::optional<AuthorityIndex> observer;

  explicit Impl(SimConfig c)
      : cfg(std::move(c)),
        committee(Committee::for_test(cfg.n, cfg.seed, cfg.workers)),
        keys(test_keypairs(cfg.n, cfg.seed)),
        coin(cfg.coin_seed ? cfg.coin_seed : cfg.seed),
        stride(cfg.workers + 1),
        rng(cfg.seed),
        adv_rng(cfg.adversary_seed) {
    size_t n = cfg.n;
    crashed.assign(n, false);
    ever_crashes.assign(n, false);
    for (const auto& c : cfg.crashes) ever_crashes.at(c.who) = true;
    nic_free.assign(n * stride, 0);
    drops.assign(n * stride * n * stride, 0);
    seen_batches.resize(n);
    reported.resize(n);
    client_seq.assign(n * cfg.workers, 0);
    client_acc.assign(n * cfg.workers, 0.0);
    evaluated.assign(n, 0);
    rep.config = cfg;
    rep.validators.resize(n);

    for (AuthorityIndex v = 0; v < n; ++v) {
      ValidatorConfig vc = cfg.validator;
      auto it = cfg.byzantine.find(v);
      if (it != cfg.byzantine.end()) vc.primary.byzantine = it->second;
      rep.validators[v].index = v;
      rep.validators[v].mode = vc.primary.byzantine;
      if (!observer && vc.primary.byzantine == ByzantineMode::kHonest && !ever_crashes[v]) observer = v;

      pio.push_back(std::make_unique<PIo>(this, v));
      std::vector<WorkerIo*> ws;
      wio.emplace_back();
      for (WorkerId j = 0; j < cfg.workers; ++j) {
        wio[v].push_back(std::make_unique<WIo>(this, v, j));
        ws.push_back(wio[v].back().get());
      }
      vals.push_back(std::make_unique<Validator>(v, committee, keys[v], coin, *pio[v], ws, vc));
      Validator& val = *vals[v];
      for (WorkerId j = 0; j < cfg.workers; ++j) {
        val.worker(j).set_seal_hook([this](const BatchPtr& b) { batches.emplace(b->digest(), b); });
      }
      val.on_commit([this, v](const CommitEvent& ev) { on_commit(v, ev); });
      val.on_outcome([this, v](const WaveOutcome& o) { on_outcome(v, o); });
      val.on_accept([this, v](const CertificatePtr& c, const HeaderPtr& h) { on_accept(v, c, h); });
    }
  }

  uint32_t ep(AuthorityIndex v, uint32_t role) const { return static_cast<uint32_t>(v * stride + role); }
  AuthorityIndex owner(uint32_t e) const { return static_cast<AuthorityIndex>(e / stride); }

  void push(Event ev) {
    ev.seq = seq++;
    ev.tie = splitmix64(cfg.seed ^ ev.seq);
    queue.push(std::move(ev));
  }

  TimeUs sample_delay() {
    if (cfg.delay == DelayModel::kLognormal) {
      std::lognormal_distribution<double> d(cfg.lognormal_mu, cfg.lognormal_sigma);
      return std::max<TimeUs>(1, static_cast<TimeUs>(d(rng) * 1000.0));
    }
    auto span = static_cast<uint64_t>(cfg.delay_hi_us - cfg.delay_lo_us + 1);
    return cfg.delay_lo_us + static_cast<TimeUs>(rng() % span);
  }

  TimeUs adversary_extra(AuthorityIndex from, const Message& m) {
    switch (cfg.adversary) {
      case Adversary::kNone:
        return 0;
      case Adversary::kSupportMinimizer: {
        // Starve one proposal-round author of votes so its block misses the
        // next round's parent sets. The victim never depends on the coin.
        const auto* vm = std::get_if<VoteMsg>(&m);
        if (vm == nullptr || vm->vote.round % 2 == 0) return 0;
        auto victim = static_cast<AuthorityIndex>(splitmix64(cfg.adversary_seed ^ (vm->vote.round * 0x100000001b3ULL)) %
                                                  cfg.n);
        return vm->vote.author == victim ? cfg.adversary_delay_us : 0;
      }
      case Adversary::kLeaderIsolator:
        if (from == cfg.isolated && std::holds_alternative<CertificateMsg>(m)) {
          return static_cast<TimeUs>(adv_rng() % static_cast<uint64_t>(cfg.adversary_delay_us + 1));
        }
        return 0;
      case Adversary::kRoundStaller:
        if (from < committee.max_faulty() && is_primary_kind(kind_of(m))) return cfg.adversary_delay_us;
        return 0;
    }
    return 0;
  }

  std::optional<TimeUs> partition_end(AuthorityIndex a, AuthorityIndex b) const {
    for (const auto& p : cfg.partitions) {
      if (now < p.start || now >= p.end) continue;
      bool ia = std::find(p.group.begin(), p.group.end(), a) != p.group.end();
      bool ib = std::find(p.group.begin(), p.group.end(), b) != p.group.end();
      if (ia != ib) return p.end;
    }
    return std::nullopt;
  }

  void net_send(uint32_t src, uint32_t dst, MessagePtr msg, Round cancel, bool retry) {
    AuthorityIndex sv = owner(src);
    AuthorityIndex dv = owner(dst);
    if (crashed[sv]) return;
    size_t size = wire_size(*msg);
    if (retry) {
      ++rep.retransmissions;
    } else {
      ++rep.census[kind_of(*msg)];
      ++rep.messages;
      rep.bytes += size;
    }
    uint32_t& lost = drops[src * nic_free.size() + dst];
    if (cfg.drop_prob > 0 && lost < cfg.loss_cap &&
        std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.drop_prob) {
      ++lost;
      ++rep.dropped;
      push(Event{now + cfg.rto_us, 0, 0, EvType::kRetry, src, dst, std::move(msg), cancel});
      return;
    }
    TimeUs delay = sample_delay() + adversary_extra(sv, *msg);
    TimeUs depart = now;
    if (cfg.bandwidth_model) {
      depart = std::max(now, nic_free[src]) + static_cast<TimeUs>(static_cast<double>(size) * 1e6 / cfg.nic_bytes_per_s);
      nic_free[src] = depart;
    }
    TimeUs arrive = depart + delay;
    if (auto end = partition_end(sv, dv)) arrive = std::max(arrive, *end + delay);
    push(Event{arrive, 0, 0, EvType::kDeliver, src, dst, std::move(msg), cancel});
  }

  void local_send(uint32_t src, uint32_t dst, MessagePtr msg) {
    ++rep.census[kind_of(*msg)];
    push(Event{now + cfg.local_delay_us, 0, 0, EvType::kDeliver, src, dst, std::move(msg), 0});
  }

  bool honest(AuthorityIndex v) const { return rep.validators[v].honest(); }

  void on_commit(AuthorityIndex v, const CommitEvent& ev) {
    auto& r = rep.validators[v];
    Validator& val = *vals[v];
    Round local = val.primary().round();
    r.commits.push_back({ev.wave, ev.leader->digest(), ev.leader->round(), now, local});
    for (const auto& h : ev.headers) {
      r.headers.push_back(h->digest());
      r.latency_rounds_sum += static_cast<double>(local - h->round());
      ++r.latency_rounds_count;
      for (const auto& b : h->payload()) {
        r.batches.push_back(b.digest);
        if (!seen_batches[v].insert(b.digest).second) ++r.duplicate_batches;
        if (!honest(v)) continue;
        committed_batches.insert(b.digest);
        auto it = batches.find(b.digest);
        if (it == batches.end()) continue;
        for (const auto& tx : it->second->transactions()) {
          auto info = parse_tx(tx);
          if (!info || !committed_ids.insert(info->id()).second) continue;
          ++rep.committed_txs;
          auto sec = static_cast<size_t>(now / 1'000'000);
          if (rep.committed_per_second.size() <= sec) rep.committed_per_second.resize(sec + 1, 0);
          ++rep.committed_per_second[sec];
          if (info->sample) rep.samples.push_back({info->id(), info->submit_us, now, ev.wave});
        }
      }
    }
  }

  void on_outcome(AuthorityIndex v, const WaveOutcome& o) {
    rep.validators[v].outcomes.push_back(o);
    evaluated[v] = std::max(evaluated[v], o.wave);
    if (!cfg.stop_after_wave) return;
    for (AuthorityIndex i = 0; i < cfg.n; ++i) {
      if (!honest(i) || crashed[i]) continue;
      if (evaluated[i] < *cfg.stop_after_wave) return;
    }
    stop = true;
  }

  void on_accept(AuthorityIndex v, const CertificatePtr& c, const HeaderPtr& h) {
    if (cfg.record_snapshots) rep.validators[v].accepted.emplace_back(c, h);
    if (!observer || v != *observer) return;
    uint64_t bytes = 0;
    for (const auto& b : h->payload()) {
      auto it = batches.find(b.digest);
      if (it != batches.end()) bytes += it->second->payload_bytes();
    }
    auto sec = static_cast<size_t>(now / 1'000'000);
    if (rep.certified_bytes_per_second.size() <= sec) rep.certified_bytes_per_second.resize(sec + 1, 0);
    rep.certified_bytes_per_second[sec] += bytes;
  }

  void deliver(const Event& ev) {
    AuthorityIndex dv = owner(ev.b);
    if (crashed[dv]) return;
    uint64_t k = static_cast<uint64_t>(kind_of(*ev.msg));
    rep.trace_hash = splitmix64(rep.trace_hash ^ static_cast<uint64_t>(ev.time));
    rep.trace_hash = splitmix64(rep.trace_hash ^ (static_cast<uint64_t>(ev.a) << 32 | ev.b));
    rep.trace_hash = splitmix64(rep.trace_hash ^ k);
    uint32_t role = ev.b % stride;
    Validator& val = *vals[dv];
    if (role == 0) {
      if (const auto* ob = std::get_if<OurBatchMsg>(ev.msg.get())) reported[dv].push_back(ob->digest);
      val.handle_primary(*ev.msg);
    } else {
      val.handle_worker(role - 1, *ev.msg);
    }
  }

  void client_burst(AuthorityIndex v, WorkerId j) {
    size_t c = v * cfg.workers + j;
    double per_client = cfg.rate / static_cast<double>(cfg.n * cfg.workers);
    client_acc[c] += per_client * static_cast<double>(cfg.client_interval_us) / 1e6;
    auto count = static_cast<uint64_t>(client_acc[c]);
    client_acc[c] -= static_cast<double>(count);
    for (uint64_t i = 0; i < count; ++i) {
      TxInfo info{static_cast<uint32_t>(c), client_seq[c]++, now, false};
      info.sample = cfg.sample_every > 0 && info.seq % cfg.sample_every == 0;
      if (vals[v]->submit(j, make_tx(info, cfg.tx_size)) == IngestResult::kAccepted) {
        ++rep.submitted;
      } else {
        ++rep.rejected;
      }
    }
  }

  void sample_memory() {
    for (AuthorityIndex v = 0; v < cfg.n; ++v) {
      if (crashed[v]) continue;
      const Validator& val = *vals[v];
      MemorySample s{now, v, val.primary().round(), val.primary().gc_round(), val.primary().hot_rounds(),
                     val.consensus().hot_rounds()};
      auto& r = rep.validators[v];
      r.max_hot_rounds = std::max(r.max_hot_rounds, s.hot_rounds);
      rep.memory.push_back(s);
    }
  }

  void run() {
    ran = true;
    for (const auto& c : cfg.crashes) push(Event{c.at, 0, 0, EvType::kCrash, c.who, 0, nullptr, 0});
    for (AuthorityIndex v = 0; v < cfg.n; ++v) {
      push(Event{cfg.tick_us, 0, 0, EvType::kTick, v, 0, nullptr, 0});
      if (cfg.rate > 0) {
        for (WorkerId j = 0; j < cfg.workers; ++j) {
          push(Event{cfg.client_interval_us, 0, 0, EvType::kClient, v, j, nullptr, 0});
        }
      }
    }
    push(Event{cfg.sample_us, 0, 0, EvType::kSample, 0, 0, nullptr, 0});
    // Crashes at time zero happen before start.
    for (const auto& c : cfg.crashes) {
      if (c.at <= 0) crashed[c.who] = true;
    }
    for (AuthorityIndex v = 0; v < cfg.n; ++v) {
      if (!crashed[v]) vals[v]->start();
    }

    TimeUs end = cfg.duration_us + cfg.drain_us;
    while (!queue.empty() && !stop) {
      Event ev = queue.top();
      queue.pop();
      if (ev.time > end) break;
      now = ev.time;
      switch (ev.type) {
        case EvType::kDeliver:
          deliver(ev);
          break;
        case EvType::kRetry: {
          AuthorityIndex sv = owner(ev.a);
          if (crashed[sv]) break;
          if (vals[sv]->primary().round() > ev.cancel) {
            ++rep.evicted;
            break;
          }
          net_send(ev.a, ev.b, ev.msg, ev.cancel, true);
          break;
        }
        case EvType::kTick:
          if (crashed[ev.a]) break;
          vals[ev.a]->on_tick();
          push(Event{now + cfg.tick_us, 0, 0, EvType::kTick, ev.a, 0, nullptr, 0});
          break;
        case EvType::kClient:
          if (crashed[ev.a] || now > cfg.duration_us) break;
          client_burst(ev.a, ev.b);
          push(Event{now + cfg.client_interval_us, 0, 0, EvType::kClient, ev.a, ev.b, nullptr, 0});
          break;
        case EvType::kCrash:
          crashed[ev.a] = true;
          break;
        case EvType::kSample:
          sample_memory();
          push(Event{now + cfg.sample_us, 0, 0, EvType::kSample, 0, 0, nullptr, 0});
          break;
      }
    }
    rep.end_time = now;
    finish();
  }

  void finish() {
    for (AuthorityIndex v = 0; v < cfg.n; ++v) {
      auto& r = rep.validators[v];
      const Validator& val = *vals[v];
      r.crashed = crashed[v];
      r.final_round = val.primary().round();
      r.gc_round = val.primary().gc_round();
      r.primary = val.primary().metrics();
      for (size_t j = 0; j < val.worker_count(); ++j) {
        r.batches_reported += const_cast<Validator&>(val).worker(static_cast<WorkerId>(j)).metrics().batches_reported;
      }
      if (!r.honest() || ever_crashes[v]) continue;
      for (const auto& d : reported[v]) {
        if (!committed_batches.count(d)) ++rep.uncommitted_batches;
      }
      for (const auto& b : val.primary().reinjected()) {
        ++rep.reinjected_batches;
        if (!committed_batches.count(b.digest)) ++rep.reinjected_uncommitted;
      }
    }
    std::map<std::pair<Round, AuthorityIndex>, std::set<Digest>> certs;
    for (auto& val : vals) {
      for (const auto& c : val->store().certificates()) certs[{c->round(), c->author()}].insert(c->digest());
    }
    for (const auto& [k, ds] : certs) {
      if (ds.size() > 1) ++rep.equivocations_certified;
    }
  }
};

Simulator::Simulator(SimConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Simulator::~Simulator() = default;

SimReport Simulator::run() {
  if (impl_->ran) throw std::logic_error("simulator already ran");
  impl_->run();
  return impl_->rep;
}

Validator& Simulator::validator(AuthorityIndex i) { return *impl_->vals.at(i); }
const Committee& Simulator::committee() const { return impl_->committee; }
bool Simulator::crashed(AuthorityIndex i) const { return impl_->crashed.at(i); }

BatchPtr Simulator::batch(const Digest& d) const {
  auto it = impl_->batches.find(d);
  return it == impl_->batches.end() ? nullptr : it->second;
}

SimReport run_simulation(const SimConfig& config) {
  Simulator sim(config);
  return sim.run();
}

AgreementResult check_agreement(const std::vector<std::vector<Digest>>& logs) {
  AgreementResult res;
  if (logs.size() < 2) return res;
  const std::vector<Digest>* longest = &logs[0];
  for (const auto& l : logs) {
    if (l.size() > longest->size()) longest = &l;
  }
  for (size_t i = 0; i < logs.size(); ++i) {
    for (size_t k = 0; k < logs[i].size(); ++k) {
      if (logs[i][k] != (*longest)[k]) {
        res.ok = false;
        res.detail = "log " + std::to_string(i) + " diverges at index " + std::to_string(k) + ": " +
                     logs[i][k].hex().substr(0, 16) + " vs " + (*longest)[k].hex().substr(0, 16);
        return res;
      }
    }
  }
  return res;
}

AgreementResult check_agreement(const SimReport& report) {
  std::vector<std::vector<Digest>> leaders, headers, batches;
  for (const auto& v : report.validators) {
    if (!v.honest()) continue;
    std::vector<Digest> l;
    for (const auto& c : v.commits) l.push_back(c.leader);
    leaders.push_back(std::move(l));
    headers.push_back(v.headers);
    batches.push_back(v.batches);
  }
  auto a = check_agreement(leaders);
  if (!a.ok) {
    a.detail = "leaders: " + a.detail;
    return a;
  }
  auto h = check_agreement(headers);
  if (!h.ok) {
    h.detail = "headers: " + h.detail;
    return h;
  }
  // Batch digests bind their transactions, so this is transaction order.
  auto b = check_agreement(batches);
  if (!b.ok) b.detail = "batches: " + b.detail;
  return b;
}

}  // namespace dagpool
