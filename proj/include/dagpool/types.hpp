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

#include <array>
#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dagpool {

using Round = uint64_t;
using Wave = uint64_t;
using AuthorityIndex = uint32_t;
using WorkerId = uint32_t;
using Bytes = std::vector<uint8_t>;

// Cancellation round meaning "retransmit until delivered".
inline constexpr Round kNeverCancel = std::numeric_limits<Round>::max();

template <size_t N>
struct FixedBytes {
  std::array<uint8_t, N> bytes{};

  static constexpr size_t size() { return N; }
  const uint8_t* data() const { return bytes.data(); }
  uint8_t* data() { return bytes.data(); }

  std::string hex() const;
  // Throws std::invalid_argument on malformed input.
  static FixedBytes from_hex(std::string_view s);

  auto operator<=>(const FixedBytes&) const = default;
};

using Digest = FixedBytes<32>;
using PublicKey = FixedBytes<32>;
using Signature = FixedBytes<64>;

std::string to_hex(const uint8_t* data, size_t len);
Bytes from_hex(std::string_view s);

template <size_t N>
std::string FixedBytes<N>::hex() const {
  return to_hex(bytes.data(), N);
}

template <size_t N>
FixedBytes<N> FixedBytes<N>::from_hex(std::string_view s) {
  Bytes raw = dagpool::from_hex(s);
  if (raw.size() != N) throw std::invalid_argument("hex string has wrong length");
  FixedBytes<N> out;
  std::copy(raw.begin(), raw.end(), out.bytes.begin());
  return out;
}

struct DigestHash {
  size_t operator()(const Digest& d) const noexcept {
    size_t h;
    static_assert(sizeof(h) <= Digest::size());
    std::memcpy(&h, d.data(), sizeof(h));
    return h;
  }
};

using Transaction = Bytes;

// A worker-level list of raw client transactions.
class Batch {
 public:
  Batch(WorkerId worker_id, std::vector<Transaction> transactions);

  WorkerId worker_id() const { return worker_id_; }
  const std::vector<Transaction>& transactions() const { return transactions_; }
  const Digest& digest() const { return digest_; }
  size_t payload_bytes() const;

  bool operator==(const Batch& o) const { return digest_ == o.digest_; }

 private:
  WorkerId worker_id_;
  std::vector<Transaction> transactions_;
  Digest digest_;
};

struct BatchRef {
  Digest digest;
  WorkerId worker_id = 0;
  auto operator<=>(const BatchRef&) const = default;
};

// One validator's DAG vertex for a round. The digest covers every field
// except the signature.
class BlockHeader {
 public:
  BlockHeader(AuthorityIndex author, Round round, std::vector<BatchRef> payload,
              std::vector<Digest> parents, Signature signature = {});

  AuthorityIndex author() const { return author_; }
  Round round() const { return round_; }
  const std::vector<BatchRef>& payload() const { return payload_; }
  const std::vector<Digest>& parents() const { return parents_; }
  const Signature& signature() const { return signature_; }
  const Digest& digest() const { return digest_; }

  BlockHeader with_signature(const Signature& sig) const;

  bool operator==(const BlockHeader& o) const {
    return digest_ == o.digest_ && signature_ == o.signature_;
  }

 private:
  AuthorityIndex author_;
  Round round_;
  std::vector<BatchRef> payload_;
  std::vector<Digest> parents_;
  Signature signature_;
  Digest digest_;
};

// The message every vote signs: (header digest, round, author). Its hash is
// also the certificate's identity in the DAG.
Digest vote_message(const Digest& header_digest, Round round, AuthorityIndex author);

struct Vote {
  Digest header_digest;
  Round round = 0;
  AuthorityIndex author = 0;
  AuthorityIndex voter = 0;
  Signature signature;

  Digest message() const { return vote_message(header_digest, round, author); }
  bool operator==(const Vote&) const = default;
};

struct VoteSignature {
  AuthorityIndex voter = 0;
  Signature signature;
  bool operator==(const VoteSignature&) const = default;
};

class Certificate {
 public:
  Certificate(const Digest& header_digest, Round round, AuthorityIndex author,
              std::vector<VoteSignature> votes);

  const Digest& header_digest() const { return header_digest_; }
  Round round() const { return round_; }
  AuthorityIndex author() const { return author_; }
  const std::vector<VoteSignature>& votes() const { return votes_; }
  const Digest& digest() const { return digest_; }

  bool operator==(const Certificate& o) const {
    return digest_ == o.digest_ && votes_ == o.votes_;
  }

 private:
  Digest header_digest_;
  Round round_;
  AuthorityIndex author_;
  std::vector<VoteSignature> votes_;
  Digest digest_;
};

using BatchPtr = std::shared_ptr<const Batch>;
using HeaderPtr = std::shared_ptr<const BlockHeader>;
using CertificatePtr = std::shared_ptr<const Certificate>;

// Waves overlap by one round: the coin round of wave w is the proposal round
// of wave w + 1. Round 0 (genesis) belongs to no wave.
constexpr Round proposal_round(Wave w) { return 2 * w - 1; }
constexpr Round vote_round(Wave w) { return 2 * w; }
constexpr Round coin_round(Wave w) { return 2 * w + 1; }

}  // namespace dagpool

template <>
struct std::hash<dagpool::Digest> {
  size_t operator()(const dagpool::Digest& d) const noexcept { return dagpool::DigestHash{}(d); }
};
