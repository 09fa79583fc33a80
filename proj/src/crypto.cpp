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

#include "dagpool/crypto.hpp"

#include <sodium.h>

#include <fstream>
#include <sstream>

#include "dagpool/codec.hpp"
#include "dagpool/committee.hpp"

namespace dagpool {

namespace {

struct SodiumInit {
  SodiumInit() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
  }
};

void ensure_sodium() { static SodiumInit init; }

}  // namespace

Digest hash_bytes(std::span<const uint8_t> data) {
  Digest out;
  crypto_generichash(out.data(), Digest::size(), data.data(), data.size(), nullptr, 0);
  return out;
}

Digest digest_of(const Batch& b) { return b.digest(); }
Digest digest_of(const BlockHeader& h) { return h.digest(); }
Digest digest_of(const Certificate& c) { return c.digest(); }

KeyPair KeyPair::generate() {
  ensure_sodium();
  FixedBytes<32> seed;
  randombytes_buf(seed.data(), seed.size());
  return from_seed(seed);
}

KeyPair KeyPair::from_seed(const FixedBytes<32>& seed) {
  ensure_sodium();
  KeyPair kp;
  kp.seed_ = seed;
  crypto_sign_seed_keypair(kp.public_.data(), kp.secret_.data(), seed.data());
  return kp;
}

KeyPair KeyPair::derive(uint64_t seed, uint64_t index) {
  Writer w;
  w.bytes(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>("dagpool-key"), 11));
  w.u64(seed);
  w.u64(index);
  return from_seed(hash_bytes(w.data()));
}

Signature KeyPair::sign(const Digest& message) const {
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

void KeyPair::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write key file " + path);
  out << seed_.hex() << "\n";
}

KeyPair KeyPair::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read key file " + path);
  std::string line;
  std::getline(in, line);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
  return from_seed(FixedBytes<32>::from_hex(line));
}

bool verify(const PublicKey& key, const Digest& message, const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), key.data()) == 0;
}

AuthorityIndex SeededCoin::leader(Wave wave, const Committee& committee) const {
  Writer w;
  w.u64(seed_);
  w.u64(wave);
  Digest h = hash_bytes(w.data());
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(h.bytes[i]) << (8 * i);
  return static_cast<AuthorityIndex>(v % committee.size());
}

AuthorityIndex coin_flip(const CoinSource& coin, Wave wave, const Committee& committee) {
  if (wave == 0) throw std::invalid_argument("waves are numbered from 1");
  return coin.leader(wave, committee);
}

}  // namespace dagpool
