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

// dagbench: keys, local clusters, simulation campaigns and agreement checks.

#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <boost/asio/signal_set.hpp>
#include <filesystem>
#include <iostream>

#include "dagpool/bench.hpp"
#include "dagpool/node.hpp"

using namespace dagpool;

namespace {

std::string self_exe() { return std::filesystem::read_symlink("/proc/self/exe").string(); }

std::optional<ByzantineMode> parse_byzantine(const std::string& s) {
  for (auto m : {ByzantineMode::kHonest, ByzantineMode::kEquivocator, ByzantineMode::kMute,
                 ByzantineMode::kSelectiveVoter}) {
    if (s == byzantine_name(m)) return m;
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  spdlog::cfg::load_env_levels();

  CLI::App app{"dagpool benchmark and cluster tool"};
  app.require_subcommand(1);

  // keys
  auto* keys = app.add_subcommand("keys", "generate key files and a committee file");
  size_t k_n = 4, k_workers = 1;
  uint64_t k_seed = 0;
  uint16_t k_port = 7000;
  std::string k_out = "keys";
  bool k_force = false;
  keys->add_option("--n", k_n, "committee size")->required();
  keys->add_option("--workers", k_workers, "workers per validator");
  keys->add_option("--seed", k_seed, "derive keys from this seed (0: random)");
  keys->add_option("--base-port", k_port, "first port; 0 picks free ports");
  keys->add_option("--out", k_out, "output directory");
  keys->add_flag("--force", k_force, "overwrite existing files");

  // run
  auto* run = app.add_subcommand("run", "run a benchmark and write CSVs");
  BenchConfig b;
  double duration_s = 300, drain_s = 5;
  run->add_option("--mode", b.mode, "sim or cluster")->check(CLI::IsMember({"sim", "cluster"}));
  run->add_option("--nodes", b.nodes, "committee size");
  run->add_option("--workers", b.workers, "workers per validator");
  run->add_option("--rate", b.rate, "total input rate, tx/s");
  run->add_option("--tx-size", b.tx_size, "transaction size in bytes");
  run->add_option("--duration", duration_s, "client duration, seconds");
  run->add_option("--drain", drain_s, "time after clients stop, seconds");
  run->add_option("--faults", b.faults, "e.g. crash=1,drop=0.05,equivocator=0");
  run->add_option("--seed", b.seed, "seed");
  run->add_option("--out", b.out, "output directory");
  run->add_option("--gc-depth", b.gc_depth, "garbage collection depth in rounds");
  run->add_option("--sample-every", b.sample_every, "every k-th transaction is tracked");
  run->add_option("--base-port", b.base_port, "cluster ports start here; 0 picks free ports");
  run->add_option("--header-delay-us", b.header_delay_us, "cluster: longest wait for payload before proposing");

  // node
  auto* node = app.add_subcommand("node", "run one validator until SIGTERM");
  std::string n_committee, n_key, n_log, n_store, n_byz = "honest";
  AuthorityIndex n_index = 0;
  NodeConfig ncfg;
  node->add_option("--committee", n_committee, "committee file")->required();
  node->add_option("--key", n_key, "key file")->required();
  node->add_option("--index", n_index, "committee ordinal")->required();
  node->add_option("--log", n_log, "event log path");
  node->add_option("--store", n_store, "persistent store directory");
  node->add_option("--coin-seed", ncfg.coin_seed, "leader election seed");
  node->add_option("--gc-depth", ncfg.validator.gc_depth, "garbage collection depth");
  node->add_option("--byzantine", n_byz, "honest | equivocator | mute | selective-voter");
  node->add_option("--header-delay-us", ncfg.validator.primary.max_header_delay_us, "longest wait for payload");

  // check
  auto* check = app.add_subcommand("check", "check node logs for prefix agreement");
  std::vector<std::string> c_logs;
  check->add_option("logs", c_logs, "node event logs")->required()->expected(2, -1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*keys) {
      Committee c = write_keys(k_out, k_n, k_workers, k_seed, k_port, k_force);
      std::cout << "wrote " << c.size() << " keys (f=" << c.max_faulty() << ") to " << k_out << "\n";
      return 0;
    }
    if (*run) {
      b.duration_us = static_cast<TimeUs>(duration_s * 1e6);
      b.drain_us = static_cast<TimeUs>(drain_s * 1e6);
      b.node_exe = self_exe();
      BenchResult r = run_bench(b);
      write_csvs(r, b.out);
      std::cout << summary(r);
      return r.ok() ? 0 : 1;
    }
    if (*node) {
      auto mode = parse_byzantine(n_byz);
      if (!mode) throw std::invalid_argument("unknown byzantine mode: " + n_byz);
      ncfg.index = n_index;
      ncfg.log_path = n_log;
      ncfg.store_dir = n_store;
      ncfg.validator.primary.byzantine = *mode;
      asio::io_context io;
      Node nd(io, Committee::load(n_committee), KeyPair::load(n_key), ncfg);
      boost::asio::signal_set signals(io, SIGINT, SIGTERM);
      signals.async_wait([&](const boost::system::error_code&, int) {
        nd.stop();
        io.stop();
      });
      nd.start();
      io.run();
      return 0;
    }
    if (*check) {
      std::vector<NodeLog> logs;
      for (const auto& p : c_logs) logs.push_back(read_node_log(p));
      auto res = check_logs(logs);
      size_t longest = 0;
      for (const auto& l : logs) longest = std::max(longest, l.leaders.size());
      if (res.ok) {
        std::cout << "agreement ok: " << logs.size() << " logs, " << longest << " leaders\n";
        return 0;
      }
      std::cout << "agreement FAILED: " << res.detail << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
