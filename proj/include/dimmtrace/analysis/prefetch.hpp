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
#include <optional>
#include <span>

namespace dimmtrace::analysis {

struct PrefetchReport {
  std::uint64_t demand_accesses = 0;
  std::uint64_t prefetches = 0;
  double prefetch_rate = 0.0;  // percent of demand + prefetch
};

/// Single-context sequential prefetcher: once `trigger` contiguous
/// (+1 cacheline) demand accesses have been seen, every further contiguous
/// access is served by a prefetch. Any other access restarts detection.
class SequentialPrefetcher {
 public:
  explicit SequentialPrefetcher(unsigned trigger = 3) : trigger_(trigger) {}

  /// Returns true when the access was covered by a prefetch.
  bool access(std::int64_t line) {
    run_ = (last_ && line == *last_ + 1) ? run_ + 1 : 1;
    last_ = line;
    const bool covered = run_ > trigger_;
    if (covered) ++report_.prefetches;
    else ++report_.demand_accesses;
    return covered;
  }

  PrefetchReport report() const {
    PrefetchReport r = report_;
    const auto total = r.demand_accesses + r.prefetches;
    r.prefetch_rate = total == 0 ? 0.0 : 100.0 * static_cast<double>(r.prefetches) / static_cast<double>(total);
    return r;
  }

 private:
  unsigned trigger_;
  std::optional<std::int64_t> last_;
  std::uint64_t run_ = 0;
  PrefetchReport report_;
};

inline PrefetchReport emulate_seq_prefetcher(std::span<const std::int64_t> lines, unsigned trigger = 3) {
  SequentialPrefetcher pf(trigger);
  for (auto l : lines) pf.access(l);
  return pf.report();
}

}  // namespace dimmtrace::analysis
