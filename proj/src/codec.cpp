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

#include "dagpool/codec.hpp"

namespace dagpool {

void Writer::u32(uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Writer::u64(uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Writer::bytes(std::span<const uint8_t> b) {
  u32(static_cast<uint32_t>(b.size()));
  out_.insert(out_.end(), b.begin(), b.end());
}

void Reader::need(size_t n) const {
  if (in_.size() - pos_ < n) throw DecodeError("truncated input");
}

uint8_t Reader::u8() {
  need(1);
  return in_[pos_++];
}

uint32_t Reader::u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

uint64_t Reader::u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

Bytes Reader::bytes(size_t max_len) {
  uint32_t len = u32();
  if (len > max_len) throw DecodeError("field exceeds size limit");
  need(len);
  Bytes out(in_.begin() + pos_, in_.begin() + pos_ + len);
  pos_ += len;
  return out;
}

uint32_t Reader::count(size_t min_elem) {
  uint32_t n = u32();
  if (min_elem > 0 && n > (in_.size() - pos_) / min_elem) throw DecodeError("list length exceeds input");
  return n;
}

void Reader::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes");
}

namespace {

void expect_domain(Reader& r, Domain d) {
  if (r.u8() != static_cast<uint8_t>(d)) throw DecodeError("unexpected type tag");
}

void encode_header_fields(Writer& w, AuthorityIndex author, Round round,
                          const std::vector<BatchRef>& payload, const std::vector<Digest>& parents) {
  w.u8(static_cast<uint8_t>(Domain::kHeader));
  w.u32(author);
  w.u64(round);
  w.u32(static_cast<uint32_t>(payload.size()));
  for (const auto& ref : payload) {
    w.fixed(ref.digest);
    w.u32(ref.worker_id);
  }
  w.u32(static_cast<uint32_t>(parents.size()));
  for (const auto& p : parents) w.fixed(p);
}

}  // namespace

void encode(Writer& w, const Batch& b) {
  w.u8(static_cast<uint8_t>(Domain::kBatch));
  w.u32(b.worker_id());
  w.u32(static_cast<uint32_t>(b.transactions().size()));
  for (const auto& tx : b.transactions()) w.bytes(tx);
}

Bytes header_signing_bytes(AuthorityIndex author, Round round, const std::vector<BatchRef>& payload,
                           const std::vector<Digest>& parents) {
  Writer w;
  encode_header_fields(w, author, round, payload, parents);
  return std::move(w).take();
}

void encode(Writer& w, const BlockHeader& h) {
  encode_header_fields(w, h.author(), h.round(), h.payload(), h.parents());
  w.fixed(h.signature());
}

void encode(Writer& w, const Vote& v) {
  w.u8(static_cast<uint8_t>(Domain::kVote));
  w.fixed(v.header_digest);
  w.u64(v.round);
  w.u32(v.author);
  w.u32(v.voter);
  w.fixed(v.signature);
}

void encode(Writer& w, const Certificate& c) {
  w.u8(static_cast<uint8_t>(Domain::kCertificate));
  w.fixed(c.header_digest());
  w.u64(c.round());
  w.u32(c.author());
  w.u32(static_cast<uint32_t>(c.votes().size()));
  for (const auto& v : c.votes()) {
    w.u32(v.voter);
    w.fixed(v.signature);
  }
}

Batch decode_batch(Reader& r) {
  expect_domain(r, Domain::kBatch);
  WorkerId worker = r.u32();
  uint32_t n = r.count(4);
  std::vector<Transaction> txs;
  txs.reserve(n);
  for (uint32_t i = 0; i < n; ++i) txs.push_back(r.bytes());
  return Batch(worker, std::move(txs));
}

BlockHeader decode_header(Reader& r) {
  expect_domain(r, Domain::kHeader);
  AuthorityIndex author = r.u32();
  Round round = r.u64();
  uint32_t np = r.count(36);
  std::vector<BatchRef> payload;
  payload.reserve(np);
  for (uint32_t i = 0; i < np; ++i) {
    BatchRef ref;
    ref.digest = r.fixed<32>();
    ref.worker_id = r.u32();
    payload.push_back(ref);
  }
  uint32_t nparents = r.count(32);
  std::vector<Digest> parents;
  parents.reserve(nparents);
  for (uint32_t i = 0; i < nparents; ++i) parents.push_back(r.fixed<32>());
  Signature sig = r.fixed<64>();
  return BlockHeader(author, round, std::move(payload), std::move(parents), sig);
}

Vote decode_vote(Reader& r) {
  expect_domain(r, Domain::kVote);
  Vote v;
  v.header_digest = r.fixed<32>();
  v.round = r.u64();
  v.author = r.u32();
  v.voter = r.u32();
  v.signature = r.fixed<64>();
  return v;
}

Certificate decode_certificate(Reader& r) {
  expect_domain(r, Domain::kCertificate);
  Digest header = r.fixed<32>();
  Round round = r.u64();
  AuthorityIndex author = r.u32();
  uint32_t n = r.count(68);
  std::vector<VoteSignature> votes;
  votes.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    VoteSignature v;
    v.voter = r.u32();
    v.signature = r.fixed<64>();
    votes.push_back(v);
  }
  return Certificate(header, round, author, std::move(votes));
}

}  // namespace dagpool
