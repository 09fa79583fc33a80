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

#include "dagpool/committee.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dagpool {

Committee::Committee(std::vector<AuthorityInfo> authorities, uint64_t epoch)
    : authorities_(std::move(authorities)), epoch_(epoch) {
  if (authorities_.size() < 4) throw std::invalid_argument("a committee needs at least 4 authorities");
  std::sort(authorities_.begin(), authorities_.end(),
            [](const AuthorityInfo& a, const AuthorityInfo& b) { return a.key < b.key; });
  for (size_t i = 1; i < authorities_.size(); ++i) {
    if (authorities_[i - 1].key == authorities_[i].key) throw std::invalid_argument("duplicate authority key");
  }
}

Committee Committee::for_test(size_t n, uint64_t seed, size_t workers) {
  std::vector<AuthorityInfo> auths;
  for (size_t i = 0; i < n; ++i) {
    AuthorityInfo a;
    a.key = KeyPair::derive(seed, i).public_key();
    a.primary_addr = "sim:" + std::to_string(i);
    for (size_t j = 0; j < workers; ++j) {
      a.worker_addrs.push_back("sim:" + std::to_string(i) + "/" + std::to_string(j));
      a.tx_addrs.push_back("sim:" + std::to_string(i) + "/" + std::to_string(j) + "/tx");
    }
    auths.push_back(std::move(a));
  }
  return Committee(std::move(auths));
}

std::vector<KeyPair> test_keypairs(size_t n, uint64_t seed) {
  std::vector<KeyPair> keys;
  for (size_t i = 0; i < n; ++i) keys.push_back(KeyPair::derive(seed, i));
  std::sort(keys.begin(), keys.end(),
            [](const KeyPair& a, const KeyPair& b) { return a.public_key() < b.public_key(); });
  return keys;
}

std::optional<AuthorityIndex> Committee::index_of(const PublicKey& key) const {
  auto it = std::lower_bound(authorities_.begin(), authorities_.end(), key,
                             [](const AuthorityInfo& a, const PublicKey& k) { return a.key < k; });
  if (it == authorities_.end() || it->key != key) return std::nullopt;
  return static_cast<AuthorityIndex>(it - authorities_.begin());
}

std::string Committee::to_json() const {
  nlohmann::json j;
  j["epoch"] = epoch_;
  j["authorities"] = nlohmann::json::array();
  for (const auto& a : authorities_) {
    nlohmann::json e;
    e["public_key"] = a.key.hex();
    e["primary_addr"] = a.primary_addr;
    e["worker_addrs"] = a.worker_addrs;
    if (!a.tx_addrs.empty()) e["tx_addrs"] = a.tx_addrs;
    j["authorities"].push_back(e);
  }
  return j.dump(2);
}

Committee Committee::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("committee file is not valid JSON: ") + e.what());
  }
  std::vector<AuthorityInfo> auths;
  for (const auto& e : j.at("authorities")) {
    AuthorityInfo a;
    a.key = PublicKey::from_hex(e.at("public_key").get<std::string>());
    a.primary_addr = e.at("primary_addr").get<std::string>();
    a.worker_addrs = e.at("worker_addrs").get<std::vector<std::string>>();
    if (e.contains("tx_addrs")) a.tx_addrs = e.at("tx_addrs").get<std::vector<std::string>>();
    auths.push_back(std::move(a));
  }
  return Committee(std::move(auths), j.value("epoch", uint64_t{0}));
}

void Committee::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write committee file " + path);
  out << to_json() << "\n";
}

Committee Committee::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read committee file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace dagpool
