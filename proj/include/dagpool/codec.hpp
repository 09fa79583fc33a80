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

#include <cstring>
#include <span>
#include <stdexcept>
#include <string>

#include "dagpool/types.hpp"

namespace dagpool {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical encoding: fields in declaration order, integers as fixed-width
// little-endian, variable-length fields and lists prefixed by a u32 count.
class Writer {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u32(uint32_t v);
  void u64(uint64_t v);
  void bytes(std::span<const uint8_t> b);  // length-prefixed
  template <size_t N>
  void fixed(const FixedBytes<N>& b) {
    size_t at = out_.size();
    out_.resize(at + N);
    std::memcpy(out_.data() + at, b.data(), N);
  }

  const Bytes& data() const& { return out_; }
  Bytes take() && { return std::move(out_); }
  size_t size() const { return out_.size(); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> in) : in_(in) {}

  uint8_t u8();
  uint32_t u32();
  uint64_t u64();
  Bytes bytes(size_t max_len = kMaxField);
  template <size_t N>
  FixedBytes<N> fixed() {
    need(N);
    FixedBytes<N> out;
    std::memcpy(out.data(), in_.data() + pos_, N);
    pos_ += N;
    return out;
  }
  // List length guarded against allocation bombs: every element needs at
  // least `min_elem` bytes of input.
  uint32_t count(size_t min_elem = 1);

  bool done() const { return pos_ == in_.size(); }
  void expect_done() const;

  static constexpr size_t kMaxField = 64 << 20;

 private:
  void need(size_t n) const;

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

// Domain tags keep the encodings of different types disjoint.
enum class Domain : uint8_t {
  kBatch = 1,
  kHeader = 2,
  kVote = 3,
  kCertificate = 4,
};

void encode(Writer& w, const Batch& b);
void encode(Writer& w, const BlockHeader& h);  // includes the signature
void encode(Writer& w, const Vote& v);
void encode(Writer& w, const Certificate& c);

// The bytes a header digest is computed over (signature excluded).
Bytes header_signing_bytes(AuthorityIndex author, Round round,
                           const std::vector<BatchRef>& payload,
                           const std::vector<Digest>& parents);

Batch decode_batch(Reader& r);
BlockHeader decode_header(Reader& r);
Vote decode_vote(Reader& r);
Certificate decode_certificate(Reader& r);

template <typename T>
Bytes canonical_encode(const T& value) {
  Writer w;
  encode(w, value);
  return std::move(w).take();
}

// Decodes a complete buffer; trailing bytes are an error.
template <typename T, typename F>
T decode_all(std::span<const uint8_t> in, F&& fn) {
  Reader r(in);
  T out = fn(r);
  r.expect_done();
  return out;
}

}  // namespace dagpool
