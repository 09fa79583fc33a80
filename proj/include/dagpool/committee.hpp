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

#include <optional>
#include <string>
#include <vector>

#include "dagpool/crypto.hpp"
#include "dagpool/types.hpp"

namespace dagpool {

struct AuthorityInfo {
  PublicKey key;
  std::string primary_addr;
  std::vector<std::string> worker_addrs;
  // Client-facing transaction endpoints, one per worker. Optional in files.
  std::vector<std::string> tx_addrs;
};

// Authorities are kept sorted by public key, so the ordinal of an authority is
// its rank in key order. f is always derived from n.
class Committee {
 public:
  Committee(std::vector<AuthorityInfo> authorities, uint64_t epoch = 0);

  // n authorities with keys KeyPair::derive(seed, i) and placeholder addresses.
  static Committee for_test(size_t n, uint64_t seed = 0, size_t workers = 1);

  size_t size() const { return authorities_.size(); }
  size_t max_faulty() const { return (size() - 1) / 3; }
  size_t quorum() const { return 2 * max_faulty() + 1; }
  size_t validity() const { return max_faulty() + 1; }
  uint64_t epoch() const { return epoch_; }

  const AuthorityInfo& authority(AuthorityIndex i) const { return authorities_.at(i); }
  const PublicKey& key(AuthorityIndex i) const { return authorities_.at(i).key; }
  std::optional<AuthorityIndex> index_of(const PublicKey& key) const;
  const std::vector<AuthorityInfo>& authorities() const { return authorities_; }

  std::string to_json() const;
  static Committee from_json(const std::string& text);
  void save(const std::string& path) const;
  static Committee load(const std::string& path);

 private:
  std::vector<AuthorityInfo> authorities_;
  uint64_t epoch_;
};

// Keys for Committee::for_test(n, seed), ordered so that element i belongs to
// ordinal i.
std::vector<KeyPair> test_keypairs(size_t n, uint64_t seed = 0);

}  // namespace dagpool
