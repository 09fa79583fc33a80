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

#include <cstdint>
#include <optional>

#include "dagpool/types.hpp"

namespace dagpool {

// Benchmark transaction layout (little-endian):
//   u8 flags | u24 client | u32 sequence | u64 submit time (us) | padding
inline constexpr size_t kMinTxSize = 16;
inline constexpr uint8_t kSampleFlag = 1;

struct TxInfo {
  uint32_t client = 0;
  uint32_t seq = 0;
  int64_t submit_us = 0;
  bool sample = false;

  uint64_t id() const { return (static_cast<uint64_t>(client) << 32) | seq; }
};

Transaction make_tx(const TxInfo& info, size_t size);
// Nullopt for anything shorter than the fixed prefix.
std::optional<TxInfo> parse_tx(const Transaction& tx);

}  // namespace dagpool
