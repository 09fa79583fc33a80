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

#include "dagpool/bench.hpp"

#include <signal.h>
#include <spawn.h>
#include <spdlog/spdlog.h>
#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <boost/asio.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "dagpool/node.hpp"
#include "dagpool/transport.hpp"
#include "dagpool/workload.hpp"

extern char** environ;

namespace dagpool {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

AuthorityIndex parse_index(const std::string& s, size_t n) {
  size_t pos = 0;
  unsigned long v = std::stoul(s, &pos);
  if (pos != s.size() || v >= n) throw std::invalid_argument("bad validator index: " + s);
  return static_cast<AuthorityIndex>(v);
}

TimeUs seconds_us(const std::string& s) { return static_cast<TimeUs>(std::stod(s) * 1e6); }

}  // namespace

FaultSpec parse_faults(const std::string& text, size_t n) {
  FaultSpec f;
  for (const auto& item : split(text, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("fault needs key=value: " + item);
    std::string key = item.substr(0, eq);
    std::string val = item.substr(eq + 1);
    try {
      if (key == "crash") {
        auto at = val.find('@');
        f.crashes = std::stoul(val.substr(0, at));
        if (at != std::string::npos) f.crash_at_us = seconds_us(val.substr(at + 1));
        if (f.crashes > (n - 1) / 3) spdlog::warn("{} crashes exceed f = {}", f.crashes, (n - 1) / 3);
        if (f.crashes >= n) throw std::invalid_argument("cannot crash every validator");
      } else if (key == "drop") {
        f.drop_prob = std::stod(val);
        if (f.drop_prob < 0 || f.drop_prob >= 1) throw std::invalid_argument("drop must be in [0, 1)");
      } else if (key == "equivocator") {
        f.byzantine[parse_index(val, n)] = ByzantineMode::kEquivocator;
      } else if (key == "mute") {
        f.byzantine[parse_index(val, n)] = ByzantineMode::kMute;
      } else if (key == "selective") {
        f.byzantine[parse_index(val, n)] = ByzantineMode::kSelectiveVoter;
      } else if (key == "adversary") {
        auto a = parse_adversary(val);
        if (!a) throw std::invalid_argument("unknown adversary: " + val);
        f.adversary = *a;
      } else if (key == "partition") {
        auto at = val.find('@');
        auto dash = val.find('-', at);
        if (at == std::string::npos || dash == std::string::npos) throw std::invalid_argument("partition=I+J@S-E");
        PartitionSpec p;
        for (const auto& i : split(val.substr(0, at), '+')) p.group.push_back(parse_index(i, n));
        p.start = seconds_us(val.substr(at + 1, dash - at - 1));
        p.end = seconds_us(val.substr(dash + 1));
        f.partitions.push_back(p);
      } else {
        throw std::invalid_argument("unknown fault: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed fault: " + item);
    }
  }
  return f;
}

double BenchResult::mean_throughput() const {
  double secs = static_cast<double>(config.duration_us) / 1e6;
  return secs > 0 ? static_cast<double>(committed) / secs : 0;
}

std::optional<double> BenchResult::latency_quantile(double q) const {
  if (samples.empty()) return std::nullopt;
  std::vector<TimeUs> l;
  for (const auto& s : samples) l.push_back(s.commit_us - s.submit_us);
  std::sort(l.begin(), l.end());
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(l.size())));
  return static_cast<double>(l[std::clamp<size_t>(rank, 1, l.size()) - 1]);
}

SimConfig sim_config(const BenchConfig& cfg) {
  SimConfig s;
  s.seed = cfg.seed;
  s.n = cfg.nodes;
  s.workers = cfg.workers;
  s.rate = cfg.rate;
  s.tx_size = cfg.tx_size;
  s.duration_us = cfg.duration_us;
  s.drain_us = cfg.drain_us;
  s.sample_every = cfg.sample_every;
  s.validator.gc_depth = cfg.gc_depth;
  auto f = parse_faults(cfg.faults, cfg.nodes);
  for (size_t k = 0; k < f.crashes; ++k) {
    s.crashes.push_back({static_cast<AuthorityIndex>(cfg.nodes - 1 - k), f.crash_at_us});
  }
  s.drop_prob = f.drop_prob;
  s.byzantine = f.byzantine;
  s.adversary = f.adversary;
  s.partitions = f.partitions;
  return s;
}

BenchResult from_report(const BenchConfig& cfg, const SimReport& rep) {
  BenchResult r;
  r.config = cfg;
  r.samples = rep.samples;
  r.committed_per_second = rep.committed_per_second;
  r.certified_bytes_per_second = rep.certified_bytes_per_second;
  for (const auto& v : rep.validators) {
    for (const auto& o : v.outcomes) r.waves.push_back({v.index, o});
  }
  r.memory = rep.memory;
  r.submitted = rep.submitted;
  r.committed = rep.committed_txs;
  r.agreement = check_agreement(rep);
  return r;
}

void write_csvs(const BenchResult& r, const std::string& dir) {
  fs::create_directories(dir);
  auto open = [&](const std::string& name, const std::string& header) {
    std::ofstream out(fs::path(dir) / name, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + name);
    out << "# dagpool " << name.substr(0, name.find('.')) << " v1\n" << header << '\n';
    return out;
  };
  {
    auto out = open("latency.csv", "tx_id,submit_us,commit_us,latency_us,wave");
    for (const auto& s : r.samples) {
      out << s.tx_id << ',' << s.submit_us << ',' << s.commit_us << ',' << s.commit_us - s.submit_us << ',' << s.wave
          << '\n';
    }
  }
  {
    auto out = open("throughput.csv", "second,committed_tx,certified_bytes");
    size_t secs = std::max(r.committed_per_second.size(), r.certified_bytes_per_second.size());
    for (size_t i = 0; i < secs; ++i) {
      out << i << ',' << (i < r.committed_per_second.size() ? r.committed_per_second[i] : 0) << ',';
      if (i < r.certified_bytes_per_second.size()) out << r.certified_bytes_per_second[i];
      out << '\n';
    }
  }
  {
    auto out = open("waves.csv",
                    "validator,wave,leader,leader_present,support,committed,committable,proposal_certificates,"
                    "vote_certificates");
    for (const auto& w : r.waves) {
      const auto& o = w.outcome;
      out << w.validator << ',' << o.wave << ',' << o.leader << ',' << o.leader_present << ',' << o.support << ','
          << o.committed_directly << ',' << o.committable << ',' << o.proposal_certificates << ','
          << o.vote_certificates << '\n';
    }
  }
  {
    auto out = open("memory.csv", "time_s,validator,round,gc_round,hot_rounds,consensus_rounds");
    for (const auto& m : r.memory) {
      out << static_cast<double>(m.time) / 1e6 << ',' << m.validator << ',' << m.round << ',';
      if (m.gc_round) out << *m.gc_round;
      out << ',' << m.hot_rounds << ',' << m.consensus_rounds << '\n';
    }
  }
}

std::string summary(const BenchResult& r) {
  std::ostringstream s;
  size_t waves = 0, committed = 0;
  for (const auto& w : r.waves) {
    if (w.validator != r.waves.front().validator) continue;
    ++waves;
    committed += w.outcome.committed_directly;
  }
  s << "mode " << r.config.mode << ", n=" << r.config.nodes << ", workers=" << r.config.workers << '\n';
  s << "submitted " << r.submitted << ", committed " << r.committed << ", throughput " << r.mean_throughput()
    << " tx/s\n";
  if (auto p50 = r.latency_quantile(0.5)) {
    s << "latency p50 " << *p50 / 1000 << " ms, p99 " << *r.latency_quantile(0.99) / 1000 << " ms over "
      << r.samples.size() << " samples\n";
  } else {
    s << "latency: no samples\n";
  }
  if (waves) s << "waves " << waves << ", direct commit rate " << static_cast<double>(committed) / waves << '\n';
  s << "agreement " << (r.agreement.ok ? "ok" : "FAILED: " + r.agreement.detail) << '\n';
  if (r.failed) s << "run FAILED: " << r.failure << '\n';
  return s.str();
}

// ---------------------------------------------------------------------------

NodeLog read_node_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  NodeLog log;
  std::string line;
  TimeUs last_commit = 0;
  Wave last_wave = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    char kind = 0;
    ls >> kind;
    try {
      if (kind == 'C') {
        std::string hex;
        Round lr = 0, local = 0;
        ls >> last_commit >> last_wave >> lr >> hex >> local;
        if (!ls) break;
        log.leaders.push_back(Digest::from_hex(hex));
        log.commit_times.push_back(last_commit);
      } else if (kind == 'H') {
        std::string hex;
        ls >> hex;
        if (!ls) break;
        log.headers.push_back(Digest::from_hex(hex));
      } else if (kind == 'B') {
        std::string hex;
        int64_t count = -1;
        ls >> hex >> count;
        if (!ls) break;
        Digest d = Digest::from_hex(hex);
        log.batches.push_back(d);
        log.batch_commits.emplace_back(d, last_commit, count);
      } else if (kind == 'S') {
        LatencySample s;
        ls >> s.tx_id >> s.submit_us >> s.commit_us >> s.wave;
        if (!ls) break;
        log.samples.push_back(s);
      } else if (kind == 'W') {
        WaveOutcome o;
        ls >> o.wave >> o.leader >> o.leader_present >> o.support >> o.committed_directly >> o.committable >>
            o.proposal_certificates >> o.vote_certificates;
        if (!ls) break;
        log.outcomes.push_back(o);
      } else if (kind == 'M') {
        MemorySample m;
        int64_t gc = -1;
        ls >> m.time >> m.round >> gc >> m.hot_rounds >> m.consensus_rounds;
        if (!ls) break;
        if (gc >= 0) m.gc_round = static_cast<Round>(gc);
        log.memory.push_back(m);
      }
    } catch (const std::invalid_argument&) {
      // torn final line of a killed process
      break;
    }
  }
  return log;
}

AgreementResult check_logs(const std::vector<NodeLog>& logs) {
  std::vector<std::vector<Digest>> leaders, headers, batches;
  for (const auto& l : logs) {
    leaders.push_back(l.leaders);
    headers.push_back(l.headers);
    batches.push_back(l.batches);
  }
  auto a = check_agreement(leaders);
  if (!a.ok) {
    a.detail = "leaders: " + a.detail;
    return a;
  }
  a = check_agreement(headers);
  if (!a.ok) {
    a.detail = "headers: " + a.detail;
    return a;
  }
  a = check_agreement(batches);
  if (!a.ok) a.detail = "batches: " + a.detail;
  return a;
}

Committee write_keys(const std::string& dir, size_t n, size_t workers, uint64_t seed, uint16_t base_port,
                     bool force) {
  if (n < 4) throw std::invalid_argument("a committee needs at least 4 validators");
  if (workers < 1) throw std::invalid_argument("at least one worker per validator");
  fs::create_directories(dir);
  fs::path committee_path = fs::path(dir) / "committee.json";
  if (!force && fs::exists(committee_path)) throw std::runtime_error(committee_path.string() + " exists (use --force)");
  std::vector<KeyPair> keys;
  for (size_t i = 0; i < n; ++i) keys.push_back(seed ? KeyPair::derive(seed, i) : KeyPair::generate());
  std::sort(keys.begin(), keys.end(), [](const KeyPair& a, const KeyPair& b) { return a.public_key() < b.public_key(); });

  // Port 0 means: whatever the kernel hands out right now.
  std::vector<uint16_t> ports;
  size_t per = 1 + 2 * workers;
  if (base_port == 0) {
    asio::io_context io;
    std::vector<asio::ip::tcp::acceptor> held;
    for (size_t i = 0; i < n * per; ++i) {
      held.emplace_back(io, asio::ip::tcp::endpoint(asio::ip::make_address("127.0.0.1"), 0));
      ports.push_back(held.back().local_endpoint().port());
    }
  } else {
    if (base_port + n * per > 65535) throw std::invalid_argument("port range overflows");
    for (size_t i = 0; i < n * per; ++i) ports.push_back(static_cast<uint16_t>(base_port + i));
  }
  auto addr = [](uint16_t p) { return "127.0.0.1:" + std::to_string(p); };
  std::vector<AuthorityInfo> auths;
  for (size_t i = 0; i < n; ++i) {
    if (!force && fs::exists(fs::path(dir) / ("node-" + std::to_string(i) + ".key"))) {
      throw std::runtime_error("key files exist (use --force)");
    }
    AuthorityInfo a;
    a.key = keys[i].public_key();
    a.primary_addr = addr(ports[i * per]);
    for (size_t j = 0; j < workers; ++j) {
      a.worker_addrs.push_back(addr(ports[i * per + 1 + 2 * j]));
      a.tx_addrs.push_back(addr(ports[i * per + 2 + 2 * j]));
    }
    auths.push_back(std::move(a));
  }
  for (size_t i = 0; i < n; ++i) keys[i].save((fs::path(dir) / ("node-" + std::to_string(i) + ".key")).string());
  Committee c(std::move(auths));
  c.save(committee_path.string());
  return c;
}

// ---------------------------------------------------------------------------

namespace {

class Client {
 public:
  Client(std::string addr, uint32_t id, double rate, size_t tx_size, size_t sample_every)
      : addr_(std::move(addr)), id_(id), rate_(rate), tx_size_(tx_size), sample_every_(sample_every) {}

  void run(const std::atomic<bool>& stop, std::atomic<uint64_t>& submitted) {
    asio::io_context io;
    asio::ip::tcp::socket sock(io);
    auto [host, port] = split_address(addr_);
    asio::ip::tcp::endpoint ep(asio::ip::make_address(host), port);
    auto start = std::chrono::steady_clock::now();
    double sent = 0;
    bool up = false;
    while (!stop) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
      double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      size_t due = static_cast<size_t>(elapsed * rate_ - sent);
      if (!up) {
        boost::system::error_code ec;
        sock = asio::ip::tcp::socket(io);
        sock.connect(ep, ec);
        if (ec) {
          sent += static_cast<double>(due);  // the client's share is lost while the node is down
          continue;
        }
        sock.set_option(asio::ip::tcp::no_delay(true), ec);
        up = true;
      }
      Bytes buf;
      for (size_t k = 0; k < due; ++k) {
        TxInfo info{id_, seq_, wall_us(), sample_every_ && seq_ % sample_every_ == 0};
        ++seq_;
        Bytes f = frame(make_tx(info, tx_size_));
        buf.insert(buf.end(), f.begin(), f.end());
      }
      sent += static_cast<double>(due);
      if (buf.empty()) continue;
      boost::system::error_code ec;
      asio::write(sock, asio::buffer(buf), ec);
      if (ec) {
        up = false;
        continue;
      }
      submitted += due;
    }
  }

 private:
  std::string addr_;
  uint32_t id_;
  double rate_;
  size_t tx_size_;
  size_t sample_every_;
  uint32_t seq_ = 0;
};

pid_t spawn(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  pid_t pid = 0;
  if (posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0) {
    throw std::runtime_error("cannot launch " + args[0]);
  }
  return pid;
}

BenchResult run_cluster(const BenchConfig& cfg) {
  BenchResult r;
  r.config = cfg;
  if (cfg.node_exe.empty()) throw std::invalid_argument("cluster mode needs a node binary");
  auto faults = parse_faults(cfg.faults, cfg.nodes);
  if (faults.drop_prob > 0 || faults.adversary != Adversary::kNone || !faults.partitions.empty()) {
    throw std::invalid_argument("drop, adversary and partition faults are simulation-only");
  }
  fs::path dir = fs::path(cfg.out) / "cluster";
  fs::remove_all(dir);
  Committee committee = write_keys(dir.string(), cfg.nodes, cfg.workers, cfg.seed, cfg.base_port, true);

  std::vector<bool> crashes(cfg.nodes, false);
  for (size_t k = 0; k < faults.crashes; ++k) crashes[cfg.nodes - 1 - k] = true;
  std::vector<pid_t> pids(cfg.nodes, 0);
  auto log_path = [&](size_t i) { return (dir / ("node-" + std::to_string(i) + ".log")).string(); };
  for (size_t i = 0; i < cfg.nodes; ++i) {
    if (crashes[i] && faults.crash_at_us == 0) continue;
    std::vector<std::string> args{cfg.node_exe,
                                  "node",
                                  "--committee",
                                  (dir / "committee.json").string(),
                                  "--key",
                                  (dir / ("node-" + std::to_string(i) + ".key")).string(),
                                  "--index",
                                  std::to_string(i),
                                  "--log",
                                  log_path(i),
                                  "--coin-seed",
                                  std::to_string(cfg.seed),
                                  "--gc-depth",
                                  std::to_string(cfg.gc_depth),
                                  "--header-delay-us",
                                  std::to_string(cfg.header_delay_us)};
    if (auto it = faults.byzantine.find(static_cast<AuthorityIndex>(i)); it != faults.byzantine.end()) {
      args.push_back("--byzantine");
      args.push_back(byzantine_name(it->second));
    }
    pids[i] = spawn(args);
  }

  TimeUs start = wall_us();
  std::atomic<bool> stop{false};
  std::atomic<uint64_t> submitted{0};
  std::vector<std::unique_ptr<Client>> clients;
  std::vector<std::thread> threads;
  double per_client = cfg.rate / static_cast<double>(cfg.nodes * cfg.workers);
  for (size_t i = 0; i < cfg.nodes; ++i) {
    for (size_t j = 0; j < cfg.workers; ++j) {
      clients.push_back(std::make_unique<Client>(committee.authority(static_cast<AuthorityIndex>(i)).tx_addrs[j],
                                                 static_cast<uint32_t>(i * cfg.workers + j), per_client, cfg.tx_size,
                                                 cfg.sample_every));
      threads.emplace_back([&, c = clients.back().get()] { c->run(stop, submitted); });
    }
  }

  auto alive_check = [&]() {
    for (size_t i = 0; i < cfg.nodes; ++i) {
      if (!pids[i]) continue;
      int status = 0;
      if (waitpid(pids[i], &status, WNOHANG) == pids[i]) {
        pids[i] = 0;
        if (!crashes[i]) {
          r.failed = true;
          r.failure = "validator " + std::to_string(i) + " exited early";
        }
      }
    }
  };
  bool crashed_done = faults.crash_at_us == 0;
  while (wall_us() - start < cfg.duration_us) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (!crashed_done && wall_us() - start >= faults.crash_at_us) {
      for (size_t i = 0; i < cfg.nodes; ++i) {
        if (crashes[i] && pids[i]) kill(pids[i], SIGKILL);
      }
      crashed_done = true;
    }
    alive_check();
  }
  stop = true;
  for (auto& t : threads) t.join();
  std::this_thread::sleep_for(std::chrono::microseconds(cfg.drain_us));
  alive_check();
  for (size_t i = 0; i < cfg.nodes; ++i) {
    if (pids[i]) kill(pids[i], SIGTERM);
  }
  for (size_t i = 0; i < cfg.nodes; ++i) {
    if (!pids[i]) continue;
    int status = 0;
    waitpid(pids[i], &status, 0);
    if (!crashes[i] && !(WIFEXITED(status) && WEXITSTATUS(status) == 0)) {
      r.failed = true;
      r.failure = "validator " + std::to_string(i) + " did not shut down cleanly";
    }
  }
  r.submitted = submitted;

  std::vector<NodeLog> logs;
  std::map<Digest, std::pair<TimeUs, int64_t>> batches;
  std::map<uint64_t, LatencySample> samples;
  for (size_t i = 0; i < cfg.nodes; ++i) {
    if (!fs::exists(log_path(i))) continue;
    NodeLog log = read_node_log(log_path(i));
    bool honest = !faults.byzantine.count(static_cast<AuthorityIndex>(i));
    for (const auto& o : log.outcomes) r.waves.push_back({static_cast<AuthorityIndex>(i), o});
    for (auto m : log.memory) {
      m.time -= start;
      m.validator = static_cast<AuthorityIndex>(i);
      r.memory.push_back(m);
    }
    if (!honest) continue;
    for (const auto& [d, t, count] : log.batch_commits) {
      auto& b = batches.try_emplace(d, t, count).first->second;
      b.first = std::min(b.first, t);
      b.second = std::max(b.second, count);
    }
    for (const auto& s : log.samples) {
      auto [it, fresh] = samples.try_emplace(s.tx_id, s);
      if (!fresh && s.commit_us < it->second.commit_us) it->second = s;
    }
    logs.push_back(std::move(log));
  }
  for (const auto& [d, tc] : batches) {
    if (tc.second < 0) continue;
    auto sec = static_cast<size_t>(std::max<TimeUs>(0, tc.first - start) / 1'000'000);
    if (r.committed_per_second.size() <= sec) r.committed_per_second.resize(sec + 1);
    r.committed_per_second[sec] += static_cast<uint64_t>(tc.second);
    r.committed += static_cast<uint64_t>(tc.second);
  }
  for (const auto& [id, s] : samples) r.samples.push_back(s);
  r.agreement = logs.size() >= 2 ? check_logs(logs) : AgreementResult{false, "fewer than two logs"};
  return r;
}

}  // namespace

BenchResult run_bench(const BenchConfig& cfg) {
  if (cfg.rate <= 0) throw std::invalid_argument("rate must be positive");
  if (cfg.tx_size < kMinTxSize) throw std::invalid_argument("tx size must be at least 16 bytes");
  if (cfg.nodes < 4) throw std::invalid_argument("a committee needs at least 4 validators");
  if (cfg.mode == "sim") return from_report(cfg, run_simulation(sim_config(cfg)));
  if (cfg.mode == "cluster") return run_cluster(cfg);
  throw std::invalid_argument("mode must be sim or cluster");
}

}  // namespace dagpool
