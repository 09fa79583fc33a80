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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dagpool/committee.hpp"
#include "dagpool/consensus.hpp"
#include "dagpool/messages.hpp"
#include "dagpool/primary.hpp"
#include "dagpool/validator.hpp"

namespace dagpool {

enum class DelayModel { kUniform, kLognormal };
enum class Adversary { kNone, kSupportMinimizer, kLeaderIsolator, kRoundStaller };

const char* adversary_name(Adversary a);
std::optional<Adversary> parse_adversary(const std::string& s);

struct CrashSpec {
  AuthorityIndex who = 0;
  TimeUs at = 0;
};

// Links between `group` and everyone else hold traffic until `end`.
struct PartitionSpec {
  std::vector<AuthorityIndex> group;
  TimeUs start = 0;
  TimeUs end = 0;
};

struct SimConfig {
  uint64_t seed = 1;
  size_t n = 4;
  size_t workers = 1;

  // Clients stop at `duration_us`; the run continues for `drain_us`.
  TimeUs duration_us = 10'000'000;
  TimeUs drain_us = 0;
  // Stop once every live honest validator has evaluated this wave.
  std::optional<Wave> stop_after_wave;

  DelayModel delay = DelayModel::kUniform;
  TimeUs delay_lo_us = 10'000;
  TimeUs delay_hi_us = 50'000;
  // Lognormal parameters of the delay in milliseconds.
  double lognormal_mu = 3.0;
  double lognormal_sigma = 0.5;
  TimeUs local_delay_us = 100;

  double drop_prob = 0.0;
  size_t loss_cap = 20;
  TimeUs rto_us = 200'000;

  std::vector<CrashSpec> crashes;
  std::vector<PartitionSpec> partitions;
  std::map<AuthorityIndex, ByzantineMode> byzantine;

  Adversary adversary = Adversary::kNone;
  uint64_t adversary_seed = 7;
  TimeUs adversary_delay_us = 1'000'000;
  AuthorityIndex isolated = 0;

  // Total client input rate across all workers; zero disables clients.
  double rate = 0.0;
  size_t tx_size = 512;
  size_t sample_every = 100;
  TimeUs client_interval_us = 10'000;

  // Per-endpoint egress bandwidth; off means messages never queue.
  bool bandwidth_model = false;
  double nic_bytes_per_s = 12.5e6;

  ValidatorConfig validator;
  TimeUs tick_us = 10'000;
  TimeUs sample_us = 1'000'000;
  uint64_t coin_seed = 0;
  bool record_snapshots = false;
};

struct LatencySample {
  uint64_t tx_id = 0;
  TimeUs submit_us = 0;
  TimeUs commit_us = 0;
  Wave wave = 0;
};

struct CommitRecord {
  Wave wave = 0;
  Digest leader;
  Round leader_round = 0;
  TimeUs time = 0;
  Round local_round = 0;
};

struct MemorySample {
  TimeUs time = 0;
  AuthorityIndex validator = 0;
  Round round = 0;
  std::optional<Round> gc_round;
  size_t hot_rounds = 0;
  size_t consensus_rounds = 0;
};

struct ValidatorReport {
  AuthorityIndex index = 0;
  ByzantineMode mode = ByzantineMode::kHonest;
  bool crashed = false;
  std::vector<CommitRecord> commits;
  std::vector<Digest> headers;
  std::vector<Digest> batches;
  std::vector<WaveOutcome> outcomes;
  // Acceptance order, kept when snapshots are on.
  std::vector<std::pair<CertificatePtr, HeaderPtr>> accepted;
  // Committed (round, author) per header, for latency in rounds.
  double latency_rounds_sum = 0;
  uint64_t latency_rounds_count = 0;
  size_t max_hot_rounds = 0;
  Round final_round = 0;
  std::optional<Round> gc_round;
  PrimaryMetrics primary;
  uint64_t batches_reported = 0;
  uint64_t duplicate_batches = 0;

  bool honest() const { return mode == ByzantineMode::kHonest; }
};

struct SimReport {
  SimConfig config;
  std::vector<ValidatorReport> validators;
  std::map<MessageKind, uint64_t> census;
  uint64_t messages = 0;
  uint64_t bytes = 0;
  uint64_t dropped = 0;
  uint64_t evicted = 0;
  uint64_t retransmissions = 0;
  uint64_t trace_hash = 0;
  TimeUs end_time = 0;

  uint64_t submitted = 0;
  uint64_t rejected = 0;
  uint64_t committed_txs = 0;
  std::vector<LatencySample> samples;
  // Index = second; first-commit counts.
  std::vector<uint64_t> committed_per_second;
  // Index = second; payload bytes of batches referenced by certificates
  // accepted at the observer validator.
  std::vector<uint64_t> certified_bytes_per_second;
  std::vector<MemorySample> memory;
  // Reported (quorum-acked) batches of honest validators never committed.
  uint64_t uncommitted_batches = 0;
  uint64_t reinjected_batches = 0;
  uint64_t reinjected_uncommitted = 0;
  // Conflicting certificate pairs seen across all stores.
  uint64_t equivocations_certified = 0;

  std::vector<size_t> honest_indices() const;
};

// A committee of validators over a seeded virtual network. Single-threaded.
class Simulator {
 public:
  explicit Simulator(SimConfig config);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimReport run();

  // Valid after run() for post-mortem inspection.
  Validator& validator(AuthorityIndex i);
  const Committee& committee() const;
  bool crashed(AuthorityIndex i) const;
  // Every batch sealed by any worker, by digest.
  BatchPtr batch(const Digest& d) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SimReport run_simulation(const SimConfig& config);

// Prefix compatibility of commit logs.
struct AgreementResult {
  bool ok = true;
  std::string detail;
};
AgreementResult check_agreement(const std::vector<std::vector<Digest>>& logs);
AgreementResult check_agreement(const SimReport& report);

}  // namespace dagpool
