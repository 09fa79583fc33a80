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

#include <cstdio>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "dagpool/types.hpp"

namespace dagpool {

class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Column : uint8_t { kHeaders = 0, kBatches = 1, kCertificates = 2, kIndex = 3 };

// Raw key-value persistence behind a BlockStore.
class StoreBackend {
 public:
  virtual ~StoreBackend() = default;
  virtual void put(Column col, std::span<const uint8_t> key, std::span<const uint8_t> value) = 0;
  // Visits every record of a column in write order.
  virtual void scan(Column col, const std::function<void(Bytes key, Bytes value)>& fn) const = 0;
};

// Append-only log per column family, one directory per validator:
//   <dir>/headers.log, batches.log, certificates.log, index.log
// Record: u32 key length, key, u32 value length, value, u32 checksum.
// A torn record at the tail (crash mid-append) is ignored on replay.
class LogBackend final : public StoreBackend {
 public:
  explicit LogBackend(const std::string& dir, bool sync_writes = false);
  ~LogBackend() override;

  LogBackend(const LogBackend&) = delete;
  LogBackend& operator=(const LogBackend&) = delete;

  void put(Column col, std::span<const uint8_t> key, std::span<const uint8_t> value) override;
  void scan(Column col, const std::function<void(Bytes key, Bytes value)>& fn) const override;

 private:
  std::string path(Column col) const;

  std::string dir_;
  bool sync_;
  mutable std::mutex mu_;
  std::FILE* files_[4] = {};
};

enum class CertificateWrite { kInserted, kDuplicate, kConflict };

struct CausalHistory {
  // Ordered by (round, author ordinal).
  std::vector<HeaderPtr> headers;
  // Certificate or header digests needed to complete the traversal.
  std::vector<Digest> missing;

  bool complete() const { return missing.empty(); }
};

// Key-value block store: headers and batches by digest, certificates by
// certificate digest, plus a (round, author) index of certificates.
//
// Safe for concurrent readers; writers are serialized. Entries are immutable
// once written.
class BlockStore {
 public:
  BlockStore();
  explicit BlockStore(std::unique_ptr<StoreBackend> backend);

  void write(const Digest& d, const BlockHeader& h);
  void write(const Digest& d, const Batch& b);
  void write(HeaderPtr h);
  void write(BatchPtr b);
  CertificateWrite write_certificate(CertificatePtr c);

  using Value = std::variant<HeaderPtr, BatchPtr>;
  std::optional<Value> read(const Digest& d) const;
  HeaderPtr read_header(const Digest& d) const;
  BatchPtr read_batch(const Digest& d) const;
  CertificatePtr read_certificate(const Digest& d) const;
  std::optional<Digest> certificate_at(Round round, AuthorityIndex author) const;

  // Headers reachable from certificate `d` through parent edges, including
  // d's own header, restricted to rounds above the watermark.
  CausalHistory read_causal(const Digest& d) const;
  CausalHistory read_causal(const Digest& d, std::optional<Round> floor) const;

  // Rounds <= watermark are cut from causal reads.
  void set_watermark(Round r);
  std::optional<Round> watermark() const;

  size_t header_count() const;
  size_t batch_count() const;
  size_t certificate_count() const;
  std::vector<CertificatePtr> certificates() const;

 private:
  struct IndexKeyHash {
    size_t operator()(const std::pair<Round, AuthorityIndex>& k) const noexcept {
      return std::hash<uint64_t>{}(k.first * 1000003u + k.second);
    }
  };

  void replay();
  bool insert_header(HeaderPtr h);
  bool insert_batch(BatchPtr b);

  mutable std::shared_mutex mu_;
  std::unique_ptr<StoreBackend> backend_;
  std::unordered_map<Digest, HeaderPtr> headers_;
  std::unordered_map<Digest, BatchPtr> batches_;
  std::unordered_map<Digest, CertificatePtr> certificates_;
  std::unordered_map<std::pair<Round, AuthorityIndex>, Digest, IndexKeyHash> index_;
  std::optional<Round> watermark_;
};

}  // namespace dagpool
