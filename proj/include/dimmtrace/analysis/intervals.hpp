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

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dimmtrace/address_mapping.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace::analysis {

inline constexpr unsigned kAddressBitsTracked = 64;

struct IntervalStat {
  std::uint64_t index = 0;  // interval number, cycle / interval_cycles
  Cycle start_cycle = 0;
  std::uint64_t refs = 0;
  std::uint64_t bytes = 0;
  double bandwidth_bytes_per_s = 0.0;
  std::vector<std::uint64_t> bank_refs;
  std::vector<std::uint64_t> bit_toggles;  // per address bit, vs. previous reference
};

struct IntervalSeries {
  std::uint64_t interval_cycles = 0;
  std::vector<IntervalStat> intervals;
  IntervalStat totals;
};

/// Bandwidth, bank and address-bit activity per fixed interval. Intervals
/// are aligned to cycle 0; every interval between the first and last
/// reference is reported, empty or not.
class IntervalCounter {
 public:
  IntervalCounter(std::uint64_t interval_cycles, const MemConfig& cfg, const AddressMapping& mapping)
      : interval_(interval_cycles), cfg_(cfg), mapping_(mapping) {
    if (interval_cycles == 0) throw Error(ErrorKind::InvalidConfig, "interval_cycles must be >= 1");
    series_.interval_cycles = interval_cycles;
    series_.totals = blank(0);
  }

  void add(const PhysRef& r) {
    const std::uint64_t idx = r.cycle / interval_;
    if (series_.intervals.empty()) series_.intervals.push_back(blank(idx));
    while (series_.intervals.back().index < idx) series_.intervals.push_back(blank(series_.intervals.back().index + 1));
    auto& cur = series_.intervals.back();
    if (cur.index != idx) throw Error(ErrorKind::NonMonotonicCycle, "interval input out of order");

    for (IntervalStat* s : {&cur, &series_.totals}) {
      ++s->refs;
      s->bytes += cfg_.cacheline_bytes;
    }
    try {
      const auto bank = mapping_.decompose(r.addr).bank;
      if (bank < cur.bank_refs.size()) {
        ++cur.bank_refs[bank];
        ++series_.totals.bank_refs[bank];
      }
    } catch (const Error&) {
      // addresses outside the mapped space carry no bank
    }
    if (prev_) {
      std::uint64_t diff = *prev_ ^ r.addr;
      while (diff != 0) {
        const auto bit = static_cast<unsigned>(std::countr_zero(diff));
        ++cur.bit_toggles[bit];
        ++series_.totals.bit_toggles[bit];
        diff &= diff - 1;
      }
    }
    prev_ = r.addr;
  }

  IntervalSeries finish() {
    const double seconds = static_cast<double>(interval_) / cfg_.freq_hz();
    for (auto& s : series_.intervals) s.bandwidth_bytes_per_s = static_cast<double>(s.bytes) / seconds;
    if (!series_.intervals.empty()) {
      const double span = static_cast<double>(series_.intervals.size()) * seconds;
      series_.totals.bandwidth_bytes_per_s = static_cast<double>(series_.totals.bytes) / span;
      series_.totals.start_cycle = series_.intervals.front().start_cycle;
    }
    return series_;
  }

 private:
  IntervalStat blank(std::uint64_t idx) const {
    IntervalStat s;
    s.index = idx;
    s.start_cycle = idx * interval_;
    s.bank_refs.assign(cfg_.bank_count, 0);
    s.bit_toggles.assign(kAddressBitsTracked, 0);
    return s;
  }

  std::uint64_t interval_;
  MemConfig cfg_;
  AddressMapping mapping_;
  IntervalSeries series_;
  std::optional<PhysAddr> prev_;
};

inline IntervalSeries interval_stats(std::span<const PhysRef> refs, std::uint64_t interval_cycles, const MemConfig& cfg,
                                     const AddressMapping& mapping) {
  IntervalCounter c(interval_cycles, cfg, mapping);
  for (const auto& r : refs) c.add(r);
  return c.finish();
}

}  // namespace dimmtrace::analysis
