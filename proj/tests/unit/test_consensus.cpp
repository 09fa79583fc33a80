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

#include <doctest.h>

#include <random>
#include <set>

#include "../support/dag_builder.hpp"
#include "dagpool/consensus.hpp"

using namespace dagpool;
using namespace dagpool::testing;

namespace {

struct FixedCoin final : CoinSource {
  std::map<Wave, AuthorityIndex> leaders;
  AuthorityIndex leader(Wave w, const Committee&) const override {
    auto it = leaders.find(w);
    return it == leaders.end() ? 0 : it->second;
  }
};

std::vector<CommitEvent> feed_round(Consensus& c, const DagBuilder& b, Round r) {
  std::vector<CommitEvent> out;
  for (const auto& [a, node] : b.rounds.at(r)) {
    auto ev = c.add(node.cert, node.header);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

std::vector<Digest> flatten(const std::vector<CommitEvent>& events) {
  std::vector<Digest> out;
  for (const auto& e : events) {
    for (const auto& h : e.headers) out.push_back(h->digest());
  }
  return out;
}

std::set<Digest> reachable(const DagBuilder& b, const Digest& cert) {
  std::set<Digest> seen{cert};
  std::vector<Digest> todo{cert};
  while (!todo.empty()) {
    Digest d = todo.back();
    todo.pop_back();
    for (const auto& p : b.nodes.at(d).header->parents()) {
      if (seen.insert(p).second) todo.push_back(p);
    }
  }
  return seen;
}

DagBuilder random_dag(uint64_t seed, Round rounds) {
  DagBuilder b(4, seed);
  b.genesis();
  std::mt19937_64 rng(seed);
  std::vector<AuthorityIndex> all{0, 1, 2, 3};
  for (Round r = 1; r <= rounds; ++r) {
    b.add_round(r, all, [&](AuthorityIndex) {
      auto pick = all;
      std::shuffle(pick.begin(), pick.end(), rng);
      pick.resize(3);
      std::sort(pick.begin(), pick.end());
      return pick;
    });
  }
  return b;
}

}  // namespace

TEST_SUITE("consensus") {
  TEST_CASE("wave rounds overlap by one") {
    CHECK(proposal_round(1) == 1);
    CHECK(vote_round(1) == 2);
    CHECK(coin_round(1) == 3);
    CHECK(proposal_round(2) == 3);
    CHECK(vote_round(2) == 4);
    CHECK(coin_round(2) == 5);
    for (Wave w = 1; w < 50; ++w) {
      CHECK(coin_round(w) == proposal_round(w + 1));
      std::set<Round> a{proposal_round(w), vote_round(w), coin_round(w)};
      std::set<Round> b{proposal_round(w + 1), vote_round(w + 1), coin_round(w + 1)};
      std::vector<Round> both;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
      CHECK(both.size() == 1);
    }
  }

  TEST_CASE("weakly supported leader is skipped, then ordered first") {
    DagBuilder b(4);
    FixedCoin coin;
    coin.leaders = {{1, 0}, {2, 1}};
    Consensus c(b.committee, coin, 50);
    b.full_rounds(1);
    b.add_round(2, {0}, [](AuthorityIndex) { return std::vector<AuthorityIndex>{0, 1, 2}; });
    b.add_round(2, {1, 2, 3}, [](AuthorityIndex) { return std::vector<AuthorityIndex>{1, 2, 3}; });
    b.full_rounds(3);
    b.add_round(4, {0, 1}, [](AuthorityIndex) { return std::vector<AuthorityIndex>{0, 1, 2}; });
    b.add_round(4, {2, 3}, [](AuthorityIndex) { return std::vector<AuthorityIndex>{0, 2, 3}; });
    b.full_rounds(5);

    for (Round r = 0; r <= 3; ++r) CHECK(feed_round(c, b, r).empty());
    auto outcomes = c.take_outcomes();
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0].leader_present);
    CHECK(outcomes[0].support == 1);
    CHECK_FALSE(outcomes[0].committed_directly);
    CHECK(c.decided_wave() == 0);

    CHECK(feed_round(c, b, 4).empty());
    auto events = feed_round(c, b, 5);
    outcomes = c.take_outcomes();
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0].support == 2);
    CHECK(outcomes[0].committed_directly);
    REQUIRE(events.size() == 2);
    CHECK(events[0].leader->digest() == b.at(1, 0).cert->digest());
    CHECK(events[1].leader->digest() == b.at(3, 1).cert->digest());
    CHECK(c.decided_wave() == 2);
    CHECK(c.committed_leaders() == 2);
  }

  TEST_CASE("absent leader is reported, not committed") {
    DagBuilder b(4);
    FixedCoin coin;
    coin.leaders = {{1, 3}};
    Consensus c(b.committee, coin, 50);
    b.genesis();
    b.add_round(1, {0, 1, 2});
    b.add_round(2, {0, 1, 2});
    b.add_round(3, {0, 1, 2});
    for (Round r = 0; r <= 3; ++r) CHECK(feed_round(c, b, r).empty());
    CHECK(c.leader(1) == nullptr);
    auto o = c.take_outcomes();
    REQUIRE(o.size() == 1);
    CHECK_FALSE(o[0].leader_present);
  }

  TEST_CASE("saturated DAG commits every wave") {
    DagBuilder b(4, 3);
    SeededCoin coin(17);
    Consensus c(b.committee, coin, 1000);
    b.full_rounds(41);
    std::vector<CommitEvent> events;
    for (Round r = 0; r <= 41; ++r) {
      auto ev = feed_round(c, b, r);
      events.insert(events.end(), ev.begin(), ev.end());
    }
    REQUIRE(events.size() == 20);
    for (Wave w = 1; w <= 20; ++w) {
      CHECK(events[w - 1].wave == w);
      CHECK(events[w - 1].leader->round() == proposal_round(w));
    }
    for (const auto& o : c.take_outcomes()) {
      CHECK(o.support == 4);
      CHECK(o.committable == 4);
    }
    // Every header up to the last leader's round is emitted exactly once.
    auto all = flatten(events);
    CHECK(std::set<Digest>(all.begin(), all.end()).size() == all.size());
    CHECK(all.size() == 4 * 39 + 1);
  }

  TEST_CASE("first commit emits exactly the leader's closure") {
    DagBuilder b(4);
    FixedCoin coin;
    coin.leaders = {{1, 2}};
    Consensus c(b.committee, coin, 50);
    b.full_rounds(3);
    std::vector<CommitEvent> events;
    for (Round r = 0; r <= 3; ++r) {
      auto ev = feed_round(c, b, r);
      events.insert(events.end(), ev.begin(), ev.end());
    }
    REQUIRE(events.size() == 1);
    const Digest leader = b.at(1, 2).cert->digest();
    std::vector<std::pair<Round, AuthorityIndex>> expected;
    for (const auto& d : reachable(b, leader)) {
      const auto& h = b.nodes.at(d).header;
      expected.emplace_back(h->round(), h->author());
    }
    std::sort(expected.begin(), expected.end());
    std::vector<std::pair<Round, AuthorityIndex>> got;
    for (const auto& h : events[0].headers) got.emplace_back(h->round(), h->author());
    CHECK(got == expected);
    CHECK(got.size() == 5);
  }

  TEST_CASE("second commit emits only the delta") {
    DagBuilder b(4);
    FixedCoin coin;
    coin.leaders = {{1, 0}, {2, 0}};
    Consensus c(b.committee, coin, 50);
    b.full_rounds(5);
    std::vector<CommitEvent> events;
    for (Round r = 0; r <= 5; ++r) {
      auto ev = feed_round(c, b, r);
      events.insert(events.end(), ev.begin(), ev.end());
    }
    REQUIRE(events.size() == 2);
    CHECK(events[0].headers.size() == 5);
    // rounds 1 (others), 2 and the new leader
    CHECK(events[1].headers.size() == 3 + 4 + 1);
    for (const auto& h : events[1].headers) CHECK(h->round() >= 1);
  }

  TEST_CASE("path follows parent edges only") {
    DagBuilder b(4);
    FixedCoin coin;
    Consensus c(b.committee, coin, 50);
    b.genesis();
    b.add_round(1, {0, 1, 2, 3});
    b.add_round(2, {0, 1, 2, 3}, [](AuthorityIndex) { return std::vector<AuthorityIndex>{0, 1, 2}; });
    for (Round r = 0; r <= 2; ++r) feed_round(c, b, r);
    CHECK(c.path(b.at(2, 0).cert->digest(), b.at(1, 2).cert->digest()));
    CHECK_FALSE(c.path(b.at(2, 0).cert->digest(), b.at(1, 3).cert->digest()));
    CHECK(c.path(b.at(2, 0).cert->digest(), b.at(0, 3).cert->digest()));
  }

  TEST_CASE("garbage collection follows committed leaders") {
    DagBuilder b(4);
    SeededCoin coin(5);
    Consensus c(b.committee, coin, 4);
    b.full_rounds(21);
    std::optional<Round> last;
    for (Round r = 0; r <= 21; ++r) {
      for (const auto& ev : feed_round(c, b, r)) {
        if (ev.leader->round() > 4) {
          REQUIRE(ev.gc_round);
          CHECK(*ev.gc_round == ev.leader->round() - 4);
        } else {
          CHECK_FALSE(ev.gc_round);
        }
        if (last && ev.gc_round) CHECK(*ev.gc_round >= *last);
        for (const auto& h : ev.headers) {
          if (last) CHECK(h->round() > *last);
        }
        last = ev.gc_round;
      }
    }
    REQUIRE(c.gc_round());
    CHECK(*c.gc_round() == proposal_round(10) - 4);
    CHECK(c.hot_rounds() <= 21 - *c.gc_round());
    // late certificates below the watermark are ignored
    CHECK(c.add(b.at(1, 0).cert, b.at(1, 0).header).empty());
  }

  TEST_CASE("arrival order within a round does not change the output") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
      DagBuilder b = random_dag(seed, 21);
      SeededCoin coin(seed);
      std::vector<std::vector<Digest>> runs;
      for (uint64_t shuffle = 0; shuffle < 3; ++shuffle) {
        Consensus c(b.committee, coin, 50);
        std::mt19937_64 rng(seed * 31 + shuffle);
        std::vector<CommitEvent> events;
        for (Round r = 0; r <= 21; ++r) {
          std::vector<DagBuilder::Node> row;
          for (const auto& [a, node] : b.rounds.at(r)) row.push_back(node);
          std::shuffle(row.begin(), row.end(), rng);
          for (const auto& node : row) {
            auto ev = c.add(node.cert, node.header);
            events.insert(events.end(), ev.begin(), ev.end());
          }
        }
        runs.push_back(flatten(events));
      }
      CHECK(runs[0] == runs[1]);
      CHECK(runs[0] == runs[2]);
    }
  }

  TEST_CASE("divergent views commit compatible sequences") {
    // Causal arrival in random order: different validators may evaluate a
    // wave with different vote-round views, but committed leaders agree.
    for (uint64_t seed = 0; seed < 40; ++seed) {
      DagBuilder b = random_dag(100 + seed, 25);
      SeededCoin coin(seed);
      std::vector<std::vector<Digest>> leaders;
      std::vector<std::vector<Digest>> orders;
      for (uint64_t view = 0; view < 2; ++view) {
        Consensus c(b.committee, coin, 50);
        std::mt19937_64 rng(seed * 7 + view);
        std::set<Digest> added;
        std::vector<DagBuilder::Node> ready;
        std::vector<DagBuilder::Node> waiting;
        for (const auto& [d, node] : b.nodes) waiting.push_back(node);
        std::vector<CommitEvent> events;
        while (!waiting.empty()) {
          std::vector<size_t> ok;
          for (size_t i = 0; i < waiting.size(); ++i) {
            bool all = true;
            for (const auto& p : waiting[i].header->parents()) all &= added.count(p) > 0;
            if (all) ok.push_back(i);
          }
          size_t pick = ok[rng() % ok.size()];
          auto node = waiting[pick];
          waiting.erase(waiting.begin() + static_cast<long>(pick));
          added.insert(node.cert->digest());
          auto ev = c.add(node.cert, node.header);
          events.insert(events.end(), ev.begin(), ev.end());
        }
        std::vector<Digest> ls;
        for (const auto& e : events) ls.push_back(e.leader->digest());
        leaders.push_back(ls);
        orders.push_back(flatten(events));
      }
      size_t k = std::min(leaders[0].size(), leaders[1].size());
      CHECK(std::equal(leaders[0].begin(), leaders[0].begin() + static_cast<long>(k), leaders[1].begin()));
      size_t m = std::min(orders[0].size(), orders[1].size());
      CHECK(std::equal(orders[0].begin(), orders[0].begin() + static_cast<long>(m), orders[1].begin()));
    }
  }

  TEST_CASE("support probability by enumeration") {
    // Each of the 3 counted vote-round blocks links the leader independently.
    // With link probability 2/3 the chance of f+1 = 2 links is 20/27; with
    // uniform 3-of-4 parent choice it is exactly 54/64.
    auto at_least_two = [](double p) {
      double total = 0;
      for (int mask = 0; mask < 8; ++mask) {
        int k = __builtin_popcount(static_cast<unsigned>(mask));
        double pr = 1;
        for (int i = 0; i < 3; ++i) pr *= (mask >> i & 1) ? p : 1 - p;
        if (k >= 2) total += pr;
      }
      return total;
    };
    CHECK(at_least_two(2.0 / 3) == doctest::Approx(20.0 / 27));
    CHECK(8.0 / 27 + 12.0 / 27 == doctest::Approx(0.7407).epsilon(1e-3));

    int hits = 0;
    int cases = 0;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        for (int c = 0; c < 4; ++c) {
          // each voter omits exactly one of four proposals; proposal 0 is the leader
          int links = (a != 0) + (b != 0) + (c != 0);
          hits += links >= 2;
          ++cases;
        }
      }
    }
    CHECK(cases == 64);
    CHECK(hits == 54);
    CHECK(at_least_two(0.75) == doctest::Approx(54.0 / 64));
  }
}
