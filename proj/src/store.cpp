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

#include "dagpool/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <unordered_set>

#include "dagpool/codec.hpp"
#include "dagpool/crypto.hpp"

namespace dagpool {

namespace {

constexpr const char* kColumnNames[] = {"headers", "batches", "certificates", "index"};

uint32_t checksum(std::span<const uint8_t> key, std::span<const uint8_t> value) {
  Bytes buf(key.begin(), key.end());
  buf.insert(buf.end(), value.begin(), value.end());
  Digest d = hash_bytes(buf);
  return static_cast<uint32_t>(d.bytes[0]) | static_cast<uint32_t>(d.bytes[1]) << 8 |
         static_cast<uint32_t>(d.bytes[2]) << 16 | static_cast<uint32_t>(d.bytes[3]) << 24;
}

Bytes index_key(Round round, AuthorityIndex author) {
  Writer w;
  w.u64(round);
  w.u32(author);
  return std::move(w).take();
}

}  // namespace

LogBackend::LogBackend(const std::string& dir, bool sync_writes) : dir_(dir), sync_(sync_writes) {
  std::filesystem::create_directories(dir_);
  for (int c = 0; c < 4; ++c) {
    files_[c] = std::fopen(path(static_cast<Column>(c)).c_str(), "ab");
    if (files_[c] == nullptr) throw std::runtime_error("cannot open store file " + path(static_cast<Column>(c)));
  }
}

LogBackend::~LogBackend() {
  for (auto* f : files_) {
    if (f != nullptr) std::fclose(f);
  }
}

std::string LogBackend::path(Column col) const {
  return dir_ + "/" + kColumnNames[static_cast<int>(col)] + ".log";
}

void LogBackend::put(Column col, std::span<const uint8_t> key, std::span<const uint8_t> value) {
  Writer w;
  w.bytes(key);
  w.bytes(value);
  w.u32(checksum(key, value));
  std::lock_guard lock(mu_);
  std::FILE* f = files_[static_cast<int>(col)];
  if (std::fwrite(w.data().data(), 1, w.size(), f) != w.size()) throw std::runtime_error("store write failed");
  std::fflush(f);
  if (sync_) ::fsync(fileno(f));
}

void LogBackend::scan(Column col, const std::function<void(Bytes, Bytes)>& fn) const {
  std::lock_guard lock(mu_);
  std::FILE* in = std::fopen(path(col).c_str(), "rb");
  if (in == nullptr) return;
  Bytes content;
  uint8_t buf[1 << 16];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), in)) > 0) content.insert(content.end(), buf, buf + n);
  std::fclose(in);

  Reader r(content);
  while (!r.done()) {
    try {
      Bytes key = r.bytes();
      Bytes value = r.bytes();
      uint32_t sum = r.u32();
      if (sum != checksum(key, value)) break;
      fn(std::move(key), std::move(value));
    } catch (const DecodeError&) {
      break;
    }
  }
}

BlockStore::BlockStore() = default;

BlockStore::BlockStore(std::unique_ptr<StoreBackend> backend) : backend_(std::move(backend)) { replay(); }

void BlockStore::replay() {
  if (!backend_) return;
  backend_->scan(Column::kHeaders, [&](Bytes, Bytes v) {
    Reader r(v);
    auto h = std::make_shared<const BlockHeader>(decode_header(r));
    headers_.emplace(h->digest(), h);
  });
  backend_->scan(Column::kBatches, [&](Bytes, Bytes v) {
    Reader r(v);
    auto b = std::make_shared<const Batch>(decode_batch(r));
    batches_.emplace(b->digest(), b);
  });
  backend_->scan(Column::kCertificates, [&](Bytes, Bytes v) {
    Reader r(v);
    auto c = std::make_shared<const Certificate>(decode_certificate(r));
    certificates_.emplace(c->digest(), c);
  });
  backend_->scan(Column::kIndex, [&](Bytes k, Bytes v) {
    Reader kr(k);
    Round round = kr.u64();
    AuthorityIndex author = kr.u32();
    Reader vr(v);
    index_.emplace(std::make_pair(round, author), vr.fixed<32>());
  });
}

bool BlockStore::insert_header(HeaderPtr h) {
  std::unique_lock lock(mu_);
  auto [it, inserted] = headers_.emplace(h->digest(), h);
  if (inserted && backend_) backend_->put(Column::kHeaders, h->digest().bytes, canonical_encode(*h));
  return inserted;
}

bool BlockStore::insert_batch(BatchPtr b) {
  std::unique_lock lock(mu_);
  auto [it, inserted] = batches_.emplace(b->digest(), b);
  if (inserted && backend_) backend_->put(Column::kBatches, b->digest().bytes, canonical_encode(*b));
  return inserted;
}

void BlockStore::write(const Digest& d, const BlockHeader& h) {
  if (d != h.digest()) throw IntegrityError("header digest mismatch");
  insert_header(std::make_shared<const BlockHeader>(h));
}

void BlockStore::write(const Digest& d, const Batch& b) {
  if (d != b.digest()) throw IntegrityError("batch digest mismatch");
  insert_batch(std::make_shared<const Batch>(b));
}

void BlockStore::write(HeaderPtr h) { insert_header(std::move(h)); }

void BlockStore::write(BatchPtr b) { insert_batch(std::move(b)); }

CertificateWrite BlockStore::write_certificate(CertificatePtr c) {
  std::unique_lock lock(mu_);
  auto key = std::make_pair(c->round(), c->author());
  auto idx = index_.find(key);
  if (idx != index_.end()) {
    return idx->second == c->digest() ? CertificateWrite::kDuplicate : CertificateWrite::kConflict;
  }
  index_.emplace(key, c->digest());
  certificates_.emplace(c->digest(), c);
  if (backend_) {
    backend_->put(Column::kCertificates, c->digest().bytes, canonical_encode(*c));
    backend_->put(Column::kIndex, index_key(c->round(), c->author()), c->digest().bytes);
  }
  return CertificateWrite::kInserted;
}

std::optional<BlockStore::Value> BlockStore::read(const Digest& d) const {
  std::shared_lock lock(mu_);
  if (auto it = headers_.find(d); it != headers_.end()) return Value{it->second};
  if (auto it = batches_.find(d); it != batches_.end()) return Value{it->second};
  return std::nullopt;
}

HeaderPtr BlockStore::read_header(const Digest& d) const {
  std::shared_lock lock(mu_);
  auto it = headers_.find(d);
  return it == headers_.end() ? nullptr : it->second;
}

BatchPtr BlockStore::read_batch(const Digest& d) const {
  std::shared_lock lock(mu_);
  auto it = batches_.find(d);
  return it == batches_.end() ? nullptr : it->second;
}

CertificatePtr BlockStore::read_certificate(const Digest& d) const {
  std::shared_lock lock(mu_);
  auto it = certificates_.find(d);
  return it == certificates_.end() ? nullptr : it->second;
}

std::optional<Digest> BlockStore::certificate_at(Round round, AuthorityIndex author) const {
  std::shared_lock lock(mu_);
  auto it = index_.find({round, author});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CausalHistory BlockStore::read_causal(const Digest& d) const { return read_causal(d, watermark()); }

CausalHistory BlockStore::read_causal(const Digest& d, std::optional<Round> floor) const {
  std::shared_lock lock(mu_);
  CausalHistory out;
  auto above = [&](Round r) { return !floor || r > *floor; };

  std::unordered_set<Digest> seen{d};
  std::vector<Digest> frontier{d};
  while (!frontier.empty()) {
    Digest cd = frontier.back();
    frontier.pop_back();
    auto cit = certificates_.find(cd);
    if (cit == certificates_.end()) {
      out.missing.push_back(cd);
      continue;
    }
    if (!above(cit->second->round())) continue;
    auto hit = headers_.find(cit->second->header_digest());
    if (hit == headers_.end()) {
      out.missing.push_back(cit->second->header_digest());
      continue;
    }
    out.headers.push_back(hit->second);
    if (hit->second->round() == 0 || !above(hit->second->round() - 1)) continue;
    for (const auto& p : hit->second->parents()) {
      if (seen.insert(p).second) frontier.push_back(p);
    }
  }
  std::sort(out.headers.begin(), out.headers.end(), [](const HeaderPtr& a, const HeaderPtr& b) {
    return std::pair(a->round(), a->author()) < std::pair(b->round(), b->author());
  });
  std::sort(out.missing.begin(), out.missing.end());
  return out;
}

void BlockStore::set_watermark(Round r) {
  std::unique_lock lock(mu_);
  if (!watermark_ || r > *watermark_) watermark_ = r;
}

std::optional<Round> BlockStore::watermark() const {
  std::shared_lock lock(mu_);
  return watermark_;
}

size_t BlockStore::header_count() const {
  std::shared_lock lock(mu_);
  return headers_.size();
}

size_t BlockStore::batch_count() const {
  std::shared_lock lock(mu_);
  return batches_.size();
}

size_t BlockStore::certificate_count() const {
  std::shared_lock lock(mu_);
  return certificates_.size();
}

std::vector<CertificatePtr> BlockStore::certificates() const {
  std::shared_lock lock(mu_);
  std::vector<CertificatePtr> out;
  out.reserve(certificates_.size());
  for (const auto& [d, c] : certificates_) out.push_back(c);
  return out;
}

}  // namespace dagpool
