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

#include <span>
#include <string>

#include "dagpool/types.hpp"

namespace dagpool {

class Committee;

// BLAKE2b with a 32-byte output.
Digest hash_bytes(std::span<const uint8_t> data);

// Digest of a value's canonical encoding.
Digest digest_of(const Batch& b);
Digest digest_of(const BlockHeader& h);
Digest digest_of(const Certificate& c);

// Ed25519 key pair. The secret is the 32-byte seed, which is what key files
// store.
class KeyPair {
 public:
  static KeyPair generate();
  static KeyPair from_seed(const FixedBytes<32>& seed);
  // Deterministic derivation used by tests and `keys --seed`.
  static KeyPair derive(uint64_t seed, uint64_t index);

  const PublicKey& public_key() const { return public_; }
  const FixedBytes<32>& seed() const { return seed_; }

  Signature sign(const Digest& message) const;

  void save(const std::string& path) const;
  static KeyPair load(const std::string& path);

 private:
  FixedBytes<32> seed_;
  PublicKey public_;
  std::array<uint8_t, 64> secret_{};
};

// Never throws; malformed keys or signatures simply fail verification.
bool verify(const PublicKey& key, const Digest& message, const Signature& sig);

// Leader-election oracle. Implementations must be pure functions of their
// construction parameters, the wave and the committee.
class CoinSource {
 public:
  virtual ~CoinSource() = default;
  virtual AuthorityIndex leader(Wave wave, const Committee& committee) const = 0;
};

// Test coin: ordinal = first 8 bytes (LE) of hash(seed || wave) mod n.
class SeededCoin final : public CoinSource {
 public:
  explicit SeededCoin(uint64_t seed) : seed_(seed) {}
  AuthorityIndex leader(Wave wave, const Committee& committee) const override;

 private:
  uint64_t seed_;
};

AuthorityIndex coin_flip(const CoinSource& coin, Wave wave, const Committee& committee);

}  // namespace dagpool
