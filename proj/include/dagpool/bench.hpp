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

#include <string>
#include <vector>

#include "dagpool/netsim.hpp"

namespace dagpool {

// Faults, comma separated:
//   crash=K[@S]        last K ordinals crash at second S (default 0)
//   drop=P             per-message loss probability (sim only)
//   equivocator=I | mute=I | selective=I
//   adversary=NAME     support-minimizer | leader-isolator | round-staller (sim only)
//   partition=I[+J..]@S-E
struct FaultSpec {
  size_t crashes = 0;
  TimeUs crash_at_us = 0;
  double drop_prob = 0;
  std::map<AuthorityIndex, ByzantineMode> byzantine;
  Adversary adversary = Adversary::kNone;
  std::vector<PartitionSpec> partitions;
};

// Throws std::invalid_argument on malformed input.
FaultSpec parse_faults(const std::string& text, size_t n);

struct BenchConfig {
  std::string mode = "sim";
  size_t nodes = 4;
  size_t workers = 1;
  double rate = 1000;
  size_t tx_size = 512;
  TimeUs duration_us = 300'000'000;
  TimeUs drain_us = 5'000'000;
  std::string faults;
  uint64_t seed = 1;
  std::string out = "out";
  size_t sample_every = 100;
  Round gc_depth = 50;
  // Cluster mode: localhost has no network delay, so proposals wait for
  // payload up to this long instead of spinning through empty rounds.
  TimeUs header_delay_us = 50'000;
  // Cluster mode: binary to launch as `<exe> node ...`.
  std::string node_exe;
  uint16_t base_port = 0;
};

struct WaveRow {
  AuthorityIndex validator = 0;
  WaveOutcome outcome;
};

struct BenchResult {
  BenchConfig config;
  std::vector<LatencySample> samples;
  std::vector<uint64_t> committed_per_second;
  // Sim only; empty in cluster mode.
  std::vector<uint64_t> certified_bytes_per_second;
  std::vector<WaveRow> waves;
  std::vector<MemorySample> memory;
  uint64_t submitted = 0;
  uint64_t committed = 0;
  AgreementResult agreement;
  bool failed = false;
  std::string failure;

  bool ok() const { return !failed && agreement.ok; }
  double mean_throughput() const;
  // Over tracked samples, in microseconds; nullopt without samples.
  std::optional<double> latency_quantile(double q) const;
};

SimConfig sim_config(const BenchConfig& cfg);
BenchResult from_report(const BenchConfig& cfg, const SimReport& rep);
BenchResult run_bench(const BenchConfig& cfg);

// latency.csv, throughput.csv, waves.csv, memory.csv.
void write_csvs(const BenchResult& r, const std::string& dir);
std::string summary(const BenchResult& r);

// Node event logs, as written by Node.
struct NodeLog {
  std::vector<Digest> leaders;
  std::vector<Digest> headers;
  std::vector<Digest> batches;
  std::vector<TimeUs> commit_times;
  std::vector<WaveOutcome> outcomes;
  std::vector<LatencySample> samples;
  // Per committed batch: wall time and transaction count (-1 if unknown).
  std::vector<std::tuple<Digest, TimeUs, int64_t>> batch_commits;
  std::vector<MemorySample> memory;
};
NodeLog read_node_log(const std::string& path);
AgreementResult check_logs(const std::vector<NodeLog>& logs);

// keys(n): key files node-<ordinal>.key and committee.json in `dir`.
Committee write_keys(const std::string& dir, size_t n, size_t workers, uint64_t seed, uint16_t base_port, bool force);

}  // namespace dagpool
