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

#include "dagpool/types.hpp"

#include "dagpool/codec.hpp"
#include "dagpool/crypto.hpp"

namespace dagpool {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(const uint8_t* data, size_t len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(len * 2, '0');
  for (size_t i = 0; i < len; ++i) {
    out[2 * i] = kDigits[data[i] >> 4];
    out[2 * i + 1] = kDigits[data[i] & 0xf];
  }
  return out;
}

Bytes from_hex(std::string_view s) {
  if (s.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  Bytes out(s.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(s[2 * i]);
    int lo = hex_value(s[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
    out[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return out;
}

Batch::Batch(WorkerId worker_id, std::vector<Transaction> transactions)
    : worker_id_(worker_id), transactions_(std::move(transactions)) {
  digest_ = hash_bytes(canonical_encode(*this));
}

size_t Batch::payload_bytes() const {
  size_t total = 0;
  for (const auto& tx : transactions_) total += tx.size();
  return total;
}

BlockHeader::BlockHeader(AuthorityIndex author, Round round, std::vector<BatchRef> payload,
                         std::vector<Digest> parents, Signature signature)
    : author_(author),
      round_(round),
      payload_(std::move(payload)),
      parents_(std::move(parents)),
      signature_(signature) {
  digest_ = hash_bytes(header_signing_bytes(author_, round_, payload_, parents_));
}

BlockHeader BlockHeader::with_signature(const Signature& sig) const {
  BlockHeader out = *this;
  out.signature_ = sig;
  return out;
}

Digest vote_message(const Digest& header_digest, Round round, AuthorityIndex author) {
  Writer w;
  w.u8(static_cast<uint8_t>(Domain::kVote));
  w.fixed(header_digest);
  w.u64(round);
  w.u32(author);
  return hash_bytes(w.data());
}

Certificate::Certificate(const Digest& header_digest, Round round, AuthorityIndex author,
                         std::vector<VoteSignature> votes)
    : header_digest_(header_digest),
      round_(round),
      author_(author),
      votes_(std::move(votes)),
      digest_(vote_message(header_digest, round, author)) {}

}  // namespace dagpool
