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

// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance <name>...   run the named criteria
//   acceptance all         run every criterion
//   acceptance list        print the names

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <type_traits>

#include "../oracle/order_oracle.hpp"
#include "dagpool/bench.hpp"
#include "dagpool/codec.hpp"
#include "dagpool/netsim.hpp"

using namespace dagpool;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// --- agreement --------------------------------------------------------------

SimConfig campaign_config(uint64_t seed, size_t n) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + n);
  SimConfig cfg;
  cfg.seed = seed;
  cfg.n = n;
  cfg.rate = 200;
  cfg.duration_us = 600'000'000;
  cfg.stop_after_wave = 30;
  cfg.delay_lo_us = 5'000 + static_cast<TimeUs>(rng() % 10'000);
  cfg.delay_hi_us = cfg.delay_lo_us + 20'000 + static_cast<TimeUs>(rng() % 80'000);
  if (rng() % 4 == 0) cfg.delay = DelayModel::kLognormal;
  const double drops[] = {0.0, 0.0, 0.01, 0.05, 0.1};
  cfg.drop_prob = drops[rng() % 5];
  size_t f = (n - 1) / 3;
  size_t crashes = rng() % (f + 1);
  std::vector<AuthorityIndex> order(n);
  for (AuthorityIndex i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (size_t k = 0; k < crashes; ++k) {
    cfg.crashes.push_back({order[k], static_cast<TimeUs>(rng() % 3'000'000)});
  }
  return cfg;
}

size_t min_waves(const SimReport& rep) {
  size_t m = SIZE_MAX;
  for (const auto& v : rep.validators) {
    if (!v.honest() || v.crashed) continue;
    m = std::min(m, v.outcomes.empty() ? size_t{0} : static_cast<size_t>(v.outcomes.back().wave));
  }
  return m == SIZE_MAX ? 0 : m;
}

Result agreement() {
  size_t runs = 0, failures = 0, short_runs = 0;
  std::string first;
  uint64_t leaders = 0;
  for (size_t n : {4, 7}) {
    for (uint64_t seed = 1; seed <= 100; ++seed) {
      auto rep = run_simulation(campaign_config(seed, n));
      ++runs;
      auto a = check_agreement(rep);
      if (min_waves(rep) < 30) ++short_runs;
      if (!a.ok) {
        ++failures;
        if (first.empty()) first = "n=" + std::to_string(n) + " seed " + std::to_string(seed) + ": " + a.detail;
      }
      leaders += rep.validators[rep.honest_indices().front()].commits.size();
    }
  }
  Result r;
  r.pass = failures == 0 && short_runs == 0 && runs == 200;
  r.detail = std::to_string(runs) + " runs, " + std::to_string(failures) + " divergent, " +
             std::to_string(short_runs) + " below 30 waves, " + std::to_string(leaders) + " leaders checked";
  if (!first.empty()) r.detail += "; first: " + first;
  return r;
}

// --- mempool properties ----------------------------------------------------

struct PropertyCounts {
  uint64_t integrity = 0, availability = 0, containment = 0, causality = 0, chain_quality = 0;
  uint64_t checked_certs = 0, pairs = 0;
  double worst_causality = 1, worst_quality = 1;
  uint64_t total() const { return integrity + availability + containment + causality + chain_quality; }
};

void check_properties(Simulator& sim, const SimReport& rep, uint64_t seed, PropertyCounts& out) {
  const size_t n = rep.validators.size();
  const size_t f = (n - 1) / 3;
  std::vector<AuthorityIndex> live;
  for (AuthorityIndex v = 0; v < n; ++v) {
    if (rep.validators[v].honest() && !sim.crashed(v)) live.push_back(v);
  }
  // Every certificate known to an honest validator, by digest.
  std::map<Digest, CertificatePtr> certified;
  for (AuthorityIndex v : live) {
    for (const auto& c : sim.validator(v).store().certificates()) certified.emplace(c->digest(), c);
  }
  std::map<Round, std::set<Digest>> by_round;
  for (const auto& [d, c] : certified) by_round[c->round()].insert(d);

  for (const auto& [d, c] : certified) {
    std::optional<Bytes> seen;
    size_t holders = 0;
    for (AuthorityIndex v : live) {
      auto h = sim.validator(v).store().read_header(c->header_digest());
      if (!h) continue;
      ++holders;
      Bytes enc = canonical_encode(*h);
      if (seen && *seen != enc) ++out.integrity;
      seen = enc;
      for (const auto& ref : h->payload()) {
        std::optional<Bytes> bseen;
        for (AuthorityIndex u : live) {
          auto b = sim.validator(u).store().read_batch(ref.digest);
          if (!b) continue;
          Bytes benc = canonical_encode(*b);
          if (bseen && *bseen != benc) ++out.integrity;
          bseen = benc;
        }
      }
      break;
    }
    // Headers below a validator's collection point may be gone from others'
    // syncs, never from the voters' stores.
    holders = 0;
    for (AuthorityIndex v : live) holders += sim.validator(v).store().read_header(c->header_digest()) != nullptr;
    if (holders < f + 1) ++out.availability;
  }

  std::mt19937_64 rng(seed);
  AuthorityIndex reader = live.front();
  const BlockStore& store = sim.validator(reader).store();
  auto certs = store.certificates();
  std::sort(certs.begin(), certs.end(), [](const auto& a, const auto& b) {
    return std::pair(a->round(), a->author()) < std::pair(b->round(), b->author());
  });
  if (certs.empty()) return;
  Round top = certs.back()->round();
  // Causal reads stay inside a window so that collection below it never
  // shows up as a false miss.
  const Round window = 8;
  auto floor_of = [&](Round r) -> std::optional<Round> {
    if (r <= window) return std::nullopt;
    return r - window;
  };
  std::vector<CertificatePtr> candidates;
  for (const auto& c : certs) {
    if (c->round() > window + 2 && c->round() + 2 < top) candidates.push_back(c);
  }
  if (candidates.empty()) return;

  for (int k = 0; k < 100; ++k) {
    const auto& c = candidates[rng() % candidates.size()];
    auto fl = floor_of(c->round());
    auto outer = store.read_causal(c->digest(), fl);
    if (!outer.complete() || outer.headers.size() < 2) continue;
    std::set<Digest> outer_set;
    for (const auto& h : outer.headers) outer_set.insert(h->digest());
    const auto& pick = outer.headers[1 + rng() % (outer.headers.size() - 1)];
    auto inner_cert = store.certificate_at(pick->round(), pick->author());
    if (!inner_cert) continue;
    auto inner = store.read_causal(*inner_cert, fl);
    ++out.pairs;
    for (const auto& h : inner.headers) {
      if (!outer_set.count(h->digest())) {
        ++out.containment;
        break;
      }
    }
  }

  for (int k = 0; k < 50; ++k) {
    const auto& c = candidates[rng() % candidates.size()];
    auto fl = floor_of(c->round());
    auto hist = store.read_causal(c->digest(), fl);
    if (!hist.complete()) continue;
    ++out.checked_certs;
    size_t before = 0;
    for (Round r = fl.value_or(0) + 1; r < c->round(); ++r) before += by_round[r].size();
    size_t covered = 0, honest = 0;
    for (const auto& h : hist.headers) {
      if (h->round() < c->round()) ++covered;
      honest += rep.validators[h->author()].honest();
    }
    double cov = before ? static_cast<double>(covered) / static_cast<double>(before) : 1.0;
    double quality = static_cast<double>(honest) / static_cast<double>(hist.headers.size());
    out.worst_causality = std::min(out.worst_causality, cov);
    out.worst_quality = std::min(out.worst_quality, quality);
    if (cov < 2.0 / 3.0) ++out.causality;
    if (quality < 0.5) ++out.chain_quality;
  }
}

Result mempool_properties() {
  PropertyCounts counts;
  size_t runs = 0;
  const ByzantineMode modes[] = {ByzantineMode::kHonest, ByzantineMode::kEquivocator, ByzantineMode::kMute,
                                 ByzantineMode::kSelectiveVoter};
  for (size_t n : {4, 7}) {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
      SimConfig cfg = campaign_config(1000 + seed, n);
      cfg.crashes.clear();
      // f Byzantine authors in three of every four runs
      ByzantineMode mode = modes[seed % 4];
      if (mode != ByzantineMode::kHonest) {
        for (AuthorityIndex i = 0; i < (n - 1) / 3; ++i) cfg.byzantine[static_cast<AuthorityIndex>(n - 1 - i)] = mode;
      } else if (seed % 8 == 0) {
        cfg.crashes.push_back({0, 1'000'000});
      }
      Simulator sim(cfg);
      auto rep = sim.run();
      check_properties(sim, rep, seed, counts);
      ++runs;
    }
  }
  Result r;
  r.pass = counts.total() == 0 && counts.pairs >= 100 * runs * 9 / 10;
  r.detail = std::to_string(runs) + " runs; violations: integrity " + std::to_string(counts.integrity) +
             ", availability " + std::to_string(counts.availability) + ", containment " +
             std::to_string(counts.containment) + " (" + std::to_string(counts.pairs) + " pairs), causality " +
             std::to_string(counts.causality) + " (worst " + fmt(counts.worst_causality) + "), chain quality " +
             std::to_string(counts.chain_quality) + " (worst " + fmt(counts.worst_quality) + ")";
  return r;
}

// --- equivocation ------------------------------------------------------------

Result no_equivocation() {
  uint64_t conflicts = 0, detected = 0, rejected = 0, disagreements = 0, attempts = 0;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    SimConfig cfg = campaign_config(2000 + seed, seed % 2 ? 4 : 7);
    cfg.crashes.clear();
    cfg.byzantine[static_cast<AuthorityIndex>(seed % cfg.n)] = ByzantineMode::kEquivocator;
    auto rep = run_simulation(cfg);
    conflicts += rep.equivocations_certified;
    for (const auto& v : rep.validators) {
      if (!v.honest()) {
        attempts += v.final_round;
        continue;
      }
      detected += v.primary.equivocations_detected;
      rejected += v.primary.conflicting_certificates;
    }
    disagreements += !check_agreement(rep).ok;
  }
  Result r;
  r.pass = conflicts == 0 && disagreements == 0;
  r.detail = "50 runs, ~" + std::to_string(attempts) + " equivocating rounds, " + std::to_string(conflicts) +
             " conflicting certificate slots, " +
             std::to_string(detected) + " equivocating headers refused, " + std::to_string(rejected) +
             " conflicting certificates rejected, " + std::to_string(disagreements) + " disagreements";
  return r;
}

// --- commit rate and latency -------------------------------------------------

struct WaveStats {
  size_t waves = 0;
  size_t committed = 0;
  size_t committable_short = 0;
  size_t min_committable = SIZE_MAX;
  double latency_rounds = 0;
  double rate() const { return waves ? static_cast<double>(committed) / static_cast<double>(waves) : 0; }
};

WaveStats wave_stats(const SimReport& rep) {
  WaveStats s;
  double lat_sum = 0;
  uint64_t lat_n = 0;
  size_t f = (rep.validators.size() - 1) / 3;
  for (const auto& v : rep.validators) {
    if (!v.honest() || v.crashed) continue;
    for (const auto& o : v.outcomes) {
      ++s.waves;
      s.committed += o.committed_directly;
      s.min_committable = std::min(s.min_committable, o.committable);
      if (o.committable < f + 1) ++s.committable_short;
    }
    lat_sum += v.latency_rounds_sum;
    lat_n += v.latency_rounds_count;
  }
  s.latency_rounds = lat_n ? lat_sum / static_cast<double>(lat_n) : 0;
  return s;
}

SimConfig common_case(Wave waves) {
  SimConfig cfg;
  cfg.seed = 4242;
  cfg.n = 4;
  cfg.rate = 200;
  cfg.duration_us = 1'000'000'000;
  cfg.stop_after_wave = waves;
  return cfg;
}

SimConfig adversarial(Wave waves) {
  SimConfig cfg = common_case(waves);
  cfg.seed = 4343;
  cfg.adversary = Adversary::kSupportMinimizer;
  return cfg;
}

Result commit_rate_common() {
  auto rep = run_simulation(common_case(1000));
  auto s = wave_stats(rep);
  size_t per_validator = s.waves / 4;
  Result r;
  r.pass = per_validator >= 1000 && std::abs(s.rate() - 0.74) <= 0.05;
  r.detail = "rate " + fmt(s.rate()) + " over " + std::to_string(s.waves) + " wave evaluations (" +
             std::to_string(per_validator) + " per validator); window 0.74 +/- 0.05";
  return r;
}

Result commit_rate_adversarial() {
  auto rep = run_simulation(adversarial(300));
  auto s = wave_stats(rep);
  Result r;
  r.pass = s.waves / 4 >= 300 && s.rate() >= 0.30 && s.committable_short == 0;
  r.detail = "rate " + fmt(s.rate()) + " over " + std::to_string(s.waves) + " wave evaluations (>= 0.30); " +
             "waves below f+1 committable: " + std::to_string(s.committable_short) + ", min committable " +
             std::to_string(s.min_committable);
  return r;
}

Result latency_rounds() {
  auto common = wave_stats(run_simulation(common_case(300)));
  auto adv = wave_stats(run_simulation(adversarial(300)));
  Result r;
  r.pass = common.latency_rounds > 0 && common.latency_rounds <= 6 && adv.latency_rounds > 0 &&
           adv.latency_rounds <= 9;
  r.detail = "common-case mean " + fmt(common.latency_rounds, 2) + " rounds (<= 6), adversarial mean " +
             fmt(adv.latency_rounds, 2) + " rounds (<= 9)";
  return r;
}

// --- oracle --------------------------------------------------------------------

Result oracle_equivalence() {
  size_t snapshots = 0, mismatches = 0, log_mismatches = 0, commits = 0;
  std::string first;
  for (uint64_t seed = 1; snapshots < 50; ++seed) {
    SimConfig cfg = campaign_config(3000 + seed, 4);
    cfg.stop_after_wave = 5;
    cfg.record_snapshots = true;
    cfg.validator.gc_depth = 2 + seed % 5;
    Simulator sim(cfg);
    auto rep = sim.run();
    SeededCoin coin(cfg.coin_seed ? cfg.coin_seed : cfg.seed);
    // one snapshot per run, from a validator that is still up
    const ValidatorReport* v = nullptr;
    for (const auto& x : rep.validators) {
      if (!x.crashed && (!v || x.accepted.size() > v->accepted.size())) v = &x;
    }
    ++snapshots;
    Consensus c(sim.committee(), coin, cfg.validator.gc_depth);
    std::vector<CommitEvent> events;
    for (const auto& [cert, header] : v->accepted) {
      auto ev = c.add(cert, header);
      events.insert(events.end(), ev.begin(), ev.end());
    }
    auto replayed = oracle::replay(sim.committee(), coin, cfg.validator.gc_depth, v->accepted);
    commits += replayed.size();
    if (oracle::encode(events) != oracle::encode(replayed)) {
      ++mismatches;
      if (first.empty()) first = "seed " + std::to_string(seed);
    }
    std::vector<Digest> flat;
    for (const auto& oc : replayed) flat.insert(flat.end(), oc.headers.begin(), oc.headers.end());
    if (flat != v->headers) ++log_mismatches;
  }
  Result r;
  r.pass = mismatches == 0 && log_mismatches == 0 && commits > 0;
  r.detail = std::to_string(snapshots) + " snapshots, " + std::to_string(commits) + " commits recomputed, " +
             std::to_string(mismatches) + " byte mismatches, " + std::to_string(log_mismatches) +
             " differences from the live commit log";
  if (!first.empty()) r.detail += "; first " + first;
  return r;
}

// --- garbage collection ---------------------------------------------------------

Result gc_boundedness() {
  SimConfig cfg;
  cfg.seed = 77;
  cfg.n = 4;
  cfg.rate = 1000;
  cfg.validator.gc_depth = 50;
  cfg.duration_us = 85'000'000;
  cfg.drain_us = 15'000'000;
  auto rep = run_simulation(cfg);
  size_t worst = 0;
  size_t samples = 0;
  for (const auto& m : rep.memory) {
    worst = std::max({worst, m.hot_rounds, m.consensus_rounds});
    ++samples;
  }
  size_t waves = rep.validators[0].outcomes.empty() ? 0 : rep.validators[0].outcomes.back().wave;
  bool conserved = rep.uncommitted_batches == 0 && rep.reinjected_uncommitted == 0 &&
                   rep.committed_txs == rep.submitted - rep.rejected;
  Result r;
  r.pass = waves >= 500 && worst <= 60 && samples > 0 && conserved;
  r.detail = std::to_string(waves) + " waves, widest hot span " + std::to_string(worst) + " rounds over " +
             std::to_string(samples) + " samples (<= 60); submitted " + std::to_string(rep.submitted) +
             ", committed " + std::to_string(rep.committed_txs) + ", re-injected batches " +
             std::to_string(rep.reinjected_batches) + " (" + std::to_string(rep.reinjected_uncommitted) +
             " never committed), uncommitted batches " + std::to_string(rep.uncommitted_batches);
  return r;
}

// --- crash faults -----------------------------------------------------------------

Result crash_throughput() {
  auto run = [](size_t crashes) {
    SimConfig cfg;
    cfg.seed = 91;
    cfg.n = 10;
    cfg.rate = 5000;
    cfg.duration_us = 12'000'000;
    cfg.drain_us = 5'000'000;
    for (size_t k = 0; k < crashes; ++k) cfg.crashes.push_back({static_cast<AuthorityIndex>(9 - k), 0});
    return run_simulation(cfg);
  };
  // Committed transactions per second of client time.
  auto rate = [](const SimReport& rep) {
    return static_cast<double>(rep.committed_txs) / (static_cast<double>(rep.config.duration_us) / 1e6);
  };
  auto late_commits = [](const SimReport& rep) {
    uint64_t c = 0;
    for (size_t s = rep.committed_per_second.size() / 2; s < rep.committed_per_second.size(); ++s) {
      c += rep.committed_per_second[s];
    }
    return c;
  };
  auto base = run(0);
  double base_rate = rate(base);
  Result r;
  r.pass = base_rate > 0;
  r.detail = "no faults " + fmt(base_rate, 0) + " tx/s";
  for (size_t c : {1, 3}) {
    auto rep = run(c);
    double got = rate(rep);
    double need = static_cast<double>(10 - c) / 10.0 * 0.5 * base_rate;
    bool ok = got >= need && late_commits(rep) > 0 && check_agreement(rep).ok;
    r.pass &= ok;
    r.detail += "; " + std::to_string(c) + " crashed " + fmt(got, 0) + " tx/s (>= " + fmt(need, 0) + ")";
  }
  return r;
}

// --- scale-out ------------------------------------------------------------------------

Result scale_out() {
  // Offered load well above what one worker's link can carry.
  auto run = [](size_t workers) {
    SimConfig cfg;
    cfg.seed = 55;
    cfg.n = 4;
    cfg.workers = workers;
    cfg.bandwidth_model = true;
    cfg.nic_bytes_per_s = 2.0e6;
    cfg.rate = 6000.0 * static_cast<double>(workers);
    cfg.duration_us = 10'000'000;
    cfg.sample_every = 1000;
    return run_simulation(cfg);
  };
  // Certified payload bytes per second over the steady part of the run.
  auto steady = [](const SimReport& rep) {
    const auto& v = rep.certified_bytes_per_second;
    double sum = 0;
    size_t k = 0;
    for (size_t s = 2; s < std::min<size_t>(v.size(), 10); ++s, ++k) sum += static_cast<double>(v[s]);
    return k ? sum / static_cast<double>(k) : 0;
  };
  double single = steady(run(1));
  Result r;
  r.pass = single > 0;
  r.detail = "W=1 " + fmt(single / 1e6, 2) + " MB/s";
  for (size_t w : {2, 4}) {
    double got = steady(run(w));
    double need = 0.8 * static_cast<double>(w) * single;
    r.pass &= got >= need;
    r.detail += "; W=" + std::to_string(w) + " " + fmt(got / 1e6, 2) + " MB/s (>= " + fmt(need / 1e6, 2) + ")";
  }
  return r;
}

// --- zero-message consensus -----------------------------------------------------------

Result zero_message() {
  static_assert(std::is_constructible_v<Consensus, const Committee&, const CoinSource&, Round>);
  bool same = true;
  std::string detail;
  uint64_t total = 0;
  for (uint64_t seed : {1, 2, 3}) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n = 4;
    cfg.rate = 500;
    cfg.duration_us = 8'000'000;
    // no collection, so consensus cannot influence the primary at all
    cfg.validator.gc_depth = 1'000'000;
    auto on = run_simulation(cfg);
    cfg.validator.consensus = false;
    auto off = run_simulation(cfg);
    bool eq = on.census == off.census && on.messages == off.messages && on.trace_hash == off.trace_hash;
    size_t commits = on.validators[0].commits.size();
    same &= eq && commits > 0 && off.validators[0].commits.empty();
    total += on.messages;
    if (!eq) detail += "seed " + std::to_string(seed) + " differs: " + std::to_string(on.messages) + " vs " +
                       std::to_string(off.messages) + "; ";
  }
  Result r;
  r.pass = same;
  r.detail = detail + "3 paired runs, " + std::to_string(total) + " messages with consensus, identical census and " +
             "trace without it";
  return r;
}

// --- cluster ------------------------------------------------------------------------------

Result cluster_smoke() {
  BenchConfig cfg;
  cfg.mode = "cluster";
  cfg.nodes = 4;
  cfg.rate = 10'000;
  cfg.tx_size = 512;
  cfg.duration_us = 60'000'000;
  cfg.drain_us = 5'000'000;
  cfg.seed = 9;
  cfg.out = DAGPOOL_ACCEPTANCE_OUT;
  cfg.node_exe = DAGPOOL_DAGBENCH;
  auto res = run_bench(cfg);
  write_csvs(res, cfg.out);
  auto p99 = res.latency_quantile(0.99);
  Result r;
  r.pass = res.ok() && p99 && std::isfinite(*p99);
  r.detail = "submitted " + std::to_string(res.submitted) + ", committed " + std::to_string(res.committed) +
             ", agreement " + (res.agreement.ok ? "ok" : res.agreement.detail) + ", p99 " +
             (p99 ? fmt(*p99 / 1000, 1) + " ms" : "none") + " over " + std::to_string(res.samples.size()) +
             " samples" + (res.failed ? ", " + res.failure : "");
  return r;
}

const std::vector<std::pair<std::string, std::function<Result()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Result()>>> all = {
      {"agreement", agreement},
      {"mempool_properties", mempool_properties},
      {"no_equivocation", no_equivocation},
      {"commit_rate_common", commit_rate_common},
      {"commit_rate_adversarial", commit_rate_adversarial},
      {"latency_rounds", latency_rounds},
      {"oracle_equivalence", oracle_equivalence},
      {"gc_boundedness", gc_boundedness},
      {"crash_throughput", crash_throughput},
      {"scale_out", scale_out},
      {"zero_message", zero_message},
      {"cluster_smoke", cluster_smoke},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> names(argv + 1, argv + argc);
  if (names.empty() || names[0] == "list") {
    for (const auto& [name, fn] : criteria()) std::cout << name << "\n";
    return names.empty() ? 2 : 0;
  }
  if (names[0] == "all") {
    names.clear();
    for (const auto& [name, fn] : criteria()) names.push_back(name);
  }
  int failed = 0;
  for (const auto& name : names) {
    auto it = std::find_if(criteria().begin(), criteria().end(), [&](const auto& c) { return c.first == name; });
    if (it == criteria().end()) {
      std::cout << "FAIL " << name << ": unknown criterion\n";
      ++failed;
      continue;
    }
    auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = it->second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << ": " << r.detail << " [" << fmt(secs, 1) << " s]\n"
              << std::flush;
    failed += !r.pass;
  }
  return failed ? 1 : 0;
}
