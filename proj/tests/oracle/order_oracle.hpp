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

#include <utility>
#include <vector>

#include "dagpool/committee.hpp"
#include "dagpool/consensus.hpp"
#include "dagpool/crypto.hpp"
#include "dagpool/types.hpp"

namespace dagpool::oracle {

struct OracleCommit {
  Wave wave = 0;
  Digest leader;
  std::vector<Digest> headers;
};

// Recomputes the committed sequence from a validator's acceptance order by
// brute force: every decision re-derives the local view as a prefix of the
// snapshot and walks full ancestor sets.
std::vector<OracleCommit> replay(const Committee& committee, const CoinSource& coin, Round gc_depth,
                                 const std::vector<std::pair<CertificatePtr, HeaderPtr>>& accepted);

// Canonical bytes of a commit sequence: per commit, u64 wave, leader digest,
// u32 count and header digests.
Bytes encode(const std::vector<OracleCommit>& commits);
Bytes encode(const std::vector<CommitEvent>& events);

}  // namespace dagpool::oracle
