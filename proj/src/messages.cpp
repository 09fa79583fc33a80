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

#include "dagpool/messages.hpp"

#include "dagpool/crypto.hpp"

namespace dagpool {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void put_digests(Writer& w, const std::vector<Digest>& ds) {
  w.u32(static_cast<uint32_t>(ds.size()));
  for (const auto& d : ds) w.fixed(d);
}

std::vector<Digest> get_digests(Reader& r) {
  uint32_t n = r.count(32);
  std::vector<Digest> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) out.push_back(r.fixed<32>());
  return out;
}

}  // namespace

MessageKind kind_of(const Message& m) {
  return std::visit(overloaded{
                        [](const HeaderMsg&) { return MessageKind::kHeader; },
                        [](const VoteMsg&) { return MessageKind::kVote; },
                        [](const CertificateMsg&) { return MessageKind::kCertificate; },
                        [](const SyncRequestMsg&) { return MessageKind::kSyncRequest; },
                        [](const SyncReplyMsg&) { return MessageKind::kSyncReply; },
                        [](const BatchMsg&) { return MessageKind::kBatch; },
                        [](const BatchAckMsg&) { return MessageKind::kBatchAck; },
                        [](const BatchRequestMsg&) { return MessageKind::kBatchRequest; },
                        [](const BatchReplyMsg&) { return MessageKind::kBatchReply; },
                        [](const OurBatchMsg&) { return MessageKind::kOurBatch; },
                        [](const OthersBatchMsg&) { return MessageKind::kOthersBatch; },
                        [](const SynchronizeMsg&) { return MessageKind::kSynchronize; },
                        [](const RoundUpdateMsg&) { return MessageKind::kRoundUpdate; },
                    },
                    m);
}

const char* kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::kHeader: return "header";
    case MessageKind::kVote: return "vote";
    case MessageKind::kCertificate: return "certificate";
    case MessageKind::kSyncRequest: return "sync_request";
    case MessageKind::kSyncReply: return "sync_reply";
    case MessageKind::kBatch: return "batch";
    case MessageKind::kBatchAck: return "batch_ack";
    case MessageKind::kBatchRequest: return "batch_request";
    case MessageKind::kBatchReply: return "batch_reply";
    case MessageKind::kOurBatch: return "our_batch";
    case MessageKind::kOthersBatch: return "others_batch";
    case MessageKind::kSynchronize: return "synchronize";
    case MessageKind::kRoundUpdate: return "round_update";
  }
  return "unknown";
}

bool is_primary_kind(MessageKind k) { return static_cast<uint8_t>(k) < 16; }
bool is_worker_kind(MessageKind k) {
  return static_cast<uint8_t>(k) >= 16 && static_cast<uint8_t>(k) < 32;
}

Bytes encode_message(const Message& m) {
  Writer w;
  w.u8(static_cast<uint8_t>(kind_of(m)));
  std::visit(overloaded{
                 [&](const HeaderMsg& x) { encode(w, *x.header); },
                 [&](const VoteMsg& x) { encode(w, x.vote); },
                 [&](const CertificateMsg& x) { encode(w, *x.certificate); },
                 [&](const SyncRequestMsg& x) {
                   w.u32(x.requester);
                   put_digests(w, x.digests);
                 },
                 [&](const SyncReplyMsg& x) {
                   w.u32(static_cast<uint32_t>(x.items.size()));
                   for (const auto& item : x.items) {
                     encode(w, *item.certificate);
                     encode(w, *item.header);
                   }
                 },
                 [&](const BatchMsg& x) {
                   w.u32(x.origin);
                   encode(w, *x.batch);
                 },
                 [&](const BatchAckMsg& x) {
                   w.fixed(x.digest);
                   w.u32(x.from);
                   w.fixed(x.signature);
                 },
                 [&](const BatchRequestMsg& x) {
                   w.u32(x.requester);
                   put_digests(w, x.digests);
                 },
                 [&](const BatchReplyMsg& x) { encode(w, *x.batch); },
                 [&](const OurBatchMsg& x) {
                   w.fixed(x.digest);
                   w.u32(x.worker_id);
                 },
                 [&](const OthersBatchMsg& x) {
                   w.fixed(x.digest);
                   w.u32(x.worker_id);
                 },
                 [&](const SynchronizeMsg& x) {
                   put_digests(w, x.digests);
                   w.u32(static_cast<uint32_t>(x.targets.size()));
                   for (auto t : x.targets) w.u32(t);
                   w.u64(x.round);
                 },
                 [&](const RoundUpdateMsg& x) {
                   w.u64(x.round);
                   w.u8(x.gc_round ? 1 : 0);
                   w.u64(x.gc_round.value_or(0));
                 },
             },
             m);
  return std::move(w).take();
}

Message decode_message(std::span<const uint8_t> in) {
  Reader r(in);
  auto kind = static_cast<MessageKind>(r.u8());
  Message out = [&]() -> Message {
    switch (kind) {
      case MessageKind::kHeader:
        return HeaderMsg{std::make_shared<const BlockHeader>(decode_header(r))};
      case MessageKind::kVote:
        return VoteMsg{decode_vote(r)};
      case MessageKind::kCertificate:
        return CertificateMsg{std::make_shared<const Certificate>(decode_certificate(r))};
      case MessageKind::kSyncRequest: {
        SyncRequestMsg x;
        x.requester = r.u32();
        x.digests = get_digests(r);
        return x;
      }
      case MessageKind::kSyncReply: {
        SyncReplyMsg x;
        uint32_t n = r.count(64);
        for (uint32_t i = 0; i < n; ++i) {
          CertifiedHeader item;
          item.certificate = std::make_shared<const Certificate>(decode_certificate(r));
          item.header = std::make_shared<const BlockHeader>(decode_header(r));
          x.items.push_back(std::move(item));
        }
        return x;
      }
      case MessageKind::kBatch: {
        BatchMsg x;
        x.origin = r.u32();
        x.batch = std::make_shared<const Batch>(decode_batch(r));
        return x;
      }
      case MessageKind::kBatchAck: {
        BatchAckMsg x;
        x.digest = r.fixed<32>();
        x.from = r.u32();
        x.signature = r.fixed<64>();
        return x;
      }
      case MessageKind::kBatchRequest: {
        BatchRequestMsg x;
        x.requester = r.u32();
        x.digests = get_digests(r);
        return x;
      }
      case MessageKind::kBatchReply:
        return BatchReplyMsg{std::make_shared<const Batch>(decode_batch(r))};
      case MessageKind::kOurBatch: {
        OurBatchMsg x;
        x.digest = r.fixed<32>();
        x.worker_id = r.u32();
        return x;
      }
      case MessageKind::kOthersBatch: {
        OthersBatchMsg x;
        x.digest = r.fixed<32>();
        x.worker_id = r.u32();
        return x;
      }
      case MessageKind::kSynchronize: {
        SynchronizeMsg x;
        x.digests = get_digests(r);
        uint32_t n = r.count(4);
        for (uint32_t i = 0; i < n; ++i) x.targets.push_back(r.u32());
        x.round = r.u64();
        return x;
      }
      case MessageKind::kRoundUpdate: {
        RoundUpdateMsg x;
        x.round = r.u64();
        bool has_gc = r.u8() != 0;
        Round gc = r.u64();
        if (has_gc) x.gc_round = gc;
        return x;
      }
    }
    throw DecodeError("unknown message kind");
  }();
  r.expect_done();
  return out;
}

Digest batch_ack_message(const Digest& batch, AuthorityIndex from) {
  Writer w;
  w.u8(5);
  w.fixed(batch);
  w.u32(from);
  return hash_bytes(w.data());
}

size_t wire_size(const Message& m) {
  auto batch_size = [](const Batch& b) {
    size_t n = 1 + 4 + 4;
    for (const auto& tx : b.transactions()) n += 4 + tx.size();
    return n;
  };
  if (const auto* x = std::get_if<BatchMsg>(&m)) return 1 + 4 + batch_size(*x->batch);
  if (const auto* x = std::get_if<BatchReplyMsg>(&m)) return 1 + batch_size(*x->batch);
  return encode_message(m).size();
}

}  // namespace dagpool
