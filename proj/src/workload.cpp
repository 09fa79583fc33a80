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

#include "dagpool/workload.hpp"

#include <stdexcept>

namespace dagpool {

Transaction make_tx(const TxInfo& info, size_t size) {
  if (size < kMinTxSize) throw std::invalid_argument("transaction size below 16 bytes");
  if (info.client >= (1u << 24)) throw std::invalid_argument("client id exceeds 24 bits");
  Transaction tx(size, 0);
  tx[0] = info.sample ? kSampleFlag : 0;
  for (int i = 0; i < 3; ++i) tx[1 + i] = static_cast<uint8_t>(info.client >> (8 * i));
  for (int i = 0; i < 4; ++i) tx[4 + i] = static_cast<uint8_t>(info.seq >> (8 * i));
  auto ts = static_cast<uint64_t>(info.submit_us);
  for (int i = 0; i < 8; ++i) tx[8 + i] = static_cast<uint8_t>(ts >> (8 * i));
  return tx;
}

std::optional<TxInfo> parse_tx(const Transaction& tx) {
  if (tx.size() < kMinTxSize) return std::nullopt;
  TxInfo info;
  info.sample = (tx[0] & kSampleFlag) != 0;
  for (int i = 0; i < 3; ++i) info.client |= static_cast<uint32_t>(tx[1 + i]) << (8 * i);
  for (int i = 0; i < 4; ++i) info.seq |= static_cast<uint32_t>(tx[4 + i]) << (8 * i);
  uint64_t ts = 0;
  for (int i = 0; i < 8; ++i) ts |= static_cast<uint64_t>(tx[8 + i]) << (8 * i);
  info.submit_us = static_cast<int64_t>(ts);
  return info;
}

}  // namespace dagpool
