/*
 * Copyright (c) 2026 The dimmtrace Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
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
#include <vector>

namespace oracle {

// Erdos-Turan: for prime p, {2pk + (k^2 mod p) : 0 <= k < p} has all
// pairwise differences distinct, so it holds no 3-term progression.
inline std::vector<std::int64_t> sidon_set(std::int64_t p, std::size_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0; k < p && out.size() < n; ++k) out.push_back(2 * p * k + (k * k) % p);
  return out;
}

}  // namespace oracle
