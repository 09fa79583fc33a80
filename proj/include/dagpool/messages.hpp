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

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dagpool/codec.hpp"
#include "dagpool/types.hpp"

namespace dagpool {

// Primary-to-primary.
struct HeaderMsg {
  HeaderPtr header;
};
struct VoteMsg {
  Vote vote;
};
struct CertificateMsg {
  CertificatePtr certificate;
};
// Pull request for certificates (and their headers) by certificate digest.
struct SyncRequestMsg {
  AuthorityIndex requester = 0;
  std::vector<Digest> digests;
};
struct CertifiedHeader {
  CertificatePtr certificate;
  HeaderPtr header;
};
struct SyncReplyMsg {
  std::vector<CertifiedHeader> items;
};

// Worker-to-worker, between workers with the same id.
struct BatchMsg {
  AuthorityIndex origin = 0;
  BatchPtr batch;
};
struct BatchAckMsg {
  Digest digest;
  AuthorityIndex from = 0;
  Signature signature;
};
struct BatchRequestMsg {
  AuthorityIndex requester = 0;
  std::vector<Digest> digests;
};
struct BatchReplyMsg {
  BatchPtr batch;
};

// Worker to its own primary.
struct OurBatchMsg {
  Digest digest;
  WorkerId worker_id = 0;
};
struct OthersBatchMsg {
  Digest digest;
  WorkerId worker_id = 0;
};

// Primary to its own workers.
struct SynchronizeMsg {
  std::vector<Digest> digests;
  // Validators whose workers are asked, in order.
  std::vector<AuthorityIndex> targets;
  Round round = 0;
};
struct RoundUpdateMsg {
  Round round = 0;
  std::optional<Round> gc_round;
};

using Message =
    std::variant<HeaderMsg, VoteMsg, CertificateMsg, SyncRequestMsg, SyncReplyMsg, BatchMsg, BatchAckMsg,
                 BatchRequestMsg, BatchReplyMsg, OurBatchMsg, OthersBatchMsg, SynchronizeMsg, RoundUpdateMsg>;
using MessagePtr = std::shared_ptr<const Message>;

enum class MessageKind : uint8_t {
  kHeader = 1,
  kVote = 2,
  kCertificate = 3,
  kSyncRequest = 4,
  kSyncReply = 5,
  kBatch = 16,
  kBatchAck = 17,
  kBatchRequest = 18,
  kBatchReply = 19,
  kOurBatch = 32,
  kOthersBatch = 33,
  kSynchronize = 34,
  kRoundUpdate = 35,
};

MessageKind kind_of(const Message& m);
const char* kind_name(MessageKind k);
bool is_primary_kind(MessageKind k);
bool is_worker_kind(MessageKind k);

// Wire form: u8 kind tag followed by the canonical encoding of the payload.
Bytes encode_message(const Message& m);
Message decode_message(std::span<const uint8_t> in);
// Equals encode_message(m).size(), without encoding batches.
size_t wire_size(const Message& m);

// What a batch acknowledgment signs.
Digest batch_ack_message(const Digest& batch, AuthorityIndex from);

template <typename T>
MessagePtr make_message(T&& v) {
  return std::make_shared<const Message>(std::forward<T>(v));
}

}  // namespace dagpool
