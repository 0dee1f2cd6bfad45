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

#include <algorithm>
#include <cstdint>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

struct FifoSample {
  Cycle cycle = 0;
  std::uint64_t occupancy = 0;
};

struct FifoReport {
  std::uint64_t max_occupancy = 0;
  std::uint64_t overflow_events = 0;
  std::uint64_t dropped_records = 0;
  std::uint64_t accepted_records = 0;
  std::vector<FifoSample> occupancy_series;
};

struct FifoParams {
  std::uint64_t depth = 16 * 1024;
  std::uint64_t link_bits_per_s = 1'000'000'000;
  unsigned record_bits = 32;
  std::uint64_t sample_every = 1024;
};

/// Event-driven model of the trace FIFO between the decoder and the link.
///
/// Each reference enqueues one record at its cycle; the link transmits one
/// record every record_bits/link_bits_per_s seconds. An entry occupies the
/// FIFO until its transmission completes. A record arriving at a full FIFO
/// is dropped; a run of consecutive drops counts as one overflow event.
///
/// Time is kept as cycles * link_bits_per_s in 128-bit integers, so one
/// transmission lasts exactly record_bits * freq_hz units and no rounding
/// creeps into departure times.
inline FifoReport simulate_fifo(std::span<const PhysRef> refs, const FifoParams& params,
                                const MemConfig& cfg) {
  using Tick = unsigned __int128;
  if (params.depth == 0) throw Error(ErrorKind::InvalidConfig, "fifo depth must be > 0");
  if (params.link_bits_per_s == 0 || params.record_bits == 0)
    throw Error(ErrorKind::InvalidConfig, "link rate and record size must be > 0");

  const Tick service = Tick{params.record_bits} * (Tick{cfg.freq_mhz} * 1'000'000u);
  FifoReport rep;
  std::deque<Tick> departures;
  Tick last_departure = 0;
  bool overflowing = false;
  std::uint64_t n = 0;

  for (const auto& r : refs) {
    const Tick t = Tick{r.cycle} * params.link_bits_per_s;
    while (!departures.empty() && departures.front() <= t) departures.pop_front();
    if (departures.size() >= params.depth) {
      ++rep.dropped_records;
      if (!overflowing) ++rep.overflow_events;
      overflowing = true;
    } else {
      overflowing = false;
      last_departure = std::max(t, last_departure) + service;
      departures.push_back(last_departure);
      ++rep.accepted_records;
      rep.max_occupancy = std::max<std::uint64_t>(rep.max_occupancy, departures.size());
    }
    if (params.sample_every != 0 && n % params.sample_every == 0)
      rep.occupancy_series.push_back({r.cycle, departures.size()});
    ++n;
  }
  return rep;
}

}  // namespace dimmtrace
