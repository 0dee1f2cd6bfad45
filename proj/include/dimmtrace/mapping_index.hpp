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
#include <map>
#include <optional>
#include <tuple>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dimmtrace/error.hpp"
#include "dimmtrace/semantic.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

using Pid = std::int64_t;

/// One page-table update: physical page `phys_page` now backs
/// (`pid`, `virt_page`). Pages are page-size indices, not byte addresses.
struct PageMapping {
  Cycle cycle = 0;
  Pid pid = 0;
  std::uint64_t virt_page = 0;
  std::uint64_t phys_page = 0;
  std::uint64_t pte_addr = 0;
  bool operator==(const PageMapping&) const = default;
};

struct PageUnmap {
  Cycle cycle = 0;
  std::uint64_t phys_page = 0;
  bool operator==(const PageUnmap&) const = default;
};

struct MappingInterval {
  Cycle begin = 0;
  Cycle end = kOpenEnd;
  Pid pid = 0;
  std::uint64_t virt_page = 0;
  bool operator==(const MappingInterval&) const = default;
};

class MappingIndex {
 public:
  std::optional<MappingInterval> lookup(std::uint64_t phys_page, Cycle c) const {
    auto it = pages_.find(phys_page);
    if (it == pages_.end()) return std::nullopt;
    const auto& iv = it->second;
    auto pos = std::upper_bound(iv.begin(), iv.end(), c,
                                [](Cycle v, const MappingInterval& m) { return v < m.begin; });
    if (pos == iv.begin()) return std::nullopt;
    --pos;
    if (c >= pos->end) return std::nullopt;
    return *pos;
  }

  const std::vector<MappingInterval>& intervals(std::uint64_t phys_page) const {
    static const std::vector<MappingInterval> kEmpty;
    auto it = pages_.find(phys_page);
    return it == pages_.end() ? kEmpty : it->second;
  }

  /// Number of distinct mappings a physical page went through.
  std::size_t mapping_count(std::uint64_t phys_page) const { return intervals(phys_page).size(); }

  /// mapping count → number of physical pages with that count.
  std::map<std::size_t, std::uint64_t> remap_histogram() const {
    std::map<std::size_t, std::uint64_t> h;
    for (const auto& [page, iv] : pages_) ++h[iv.size()];
    return h;
  }

  std::size_t page_count() const { return pages_.size(); }
  const Diagnostics& diagnostics() const { return diag_; }

  void apply_map(const PageMapping& m) {
    auto& iv = pages_[m.phys_page];
    if (!iv.empty() && iv.back().end == kOpenEnd) {
      auto& cur = iv.back();
      if (cur.pid == m.pid && cur.virt_page == m.virt_page) return;
      if (cur.begin == m.cycle) {
        diag_.add(Warning::ConflictingMapping);
        iv.pop_back();
      } else {
        cur.end = m.cycle;
      }
    }
    iv.push_back({m.cycle, kOpenEnd, m.pid, m.virt_page});
  }

  void apply_unmap(const PageUnmap& u) {
    auto it = pages_.find(u.phys_page);
    if (it == pages_.end() || it->second.empty() || it->second.back().end != kOpenEnd) return;
    auto& cur = it->second.back();
    if (cur.begin == u.cycle) {
      it->second.pop_back();
      if (it->second.empty()) pages_.erase(it);
      return;
    }
    cur.end = u.cycle;
  }

 private:
  std::unordered_map<std::uint64_t, std::vector<MappingInterval>> pages_;
  Diagnostics diag_;
};

/// Replays the page-table journal. A new mapping of a physical page closes
/// its previous interval; unmaps at the same cycle apply before maps.
inline MappingIndex build_mapping_index(std::span<const PageMapping> maps, std::span<const PageUnmap> unmaps = {}) {
  struct Op {
    Cycle cycle;
    int order;
    std::size_t idx;
  };
  std::vector<Op> ops;
  ops.reserve(maps.size() + unmaps.size());
  for (std::size_t i = 0; i < unmaps.size(); ++i) ops.push_back({unmaps[i].cycle, 0, i});
  for (std::size_t i = 0; i < maps.size(); ++i) ops.push_back({maps[i].cycle, 1, i});
  std::stable_sort(ops.begin(), ops.end(),
                   [](const Op& a, const Op& b) { return std::tie(a.cycle, a.order) < std::tie(b.cycle, b.order); });
  MappingIndex index;
  for (const auto& op : ops) {
    if (op.order == 0) index.apply_unmap(unmaps[op.idx]);
    else index.apply_map(maps[op.idx]);
  }
  return index;
}

struct VirtualRef {
  Pid pid = 0;
  std::uint64_t virt_addr = 0;
  Rw rw = Rw::Read;
  Cycle cycle = 0;
  bool operator==(const VirtualRef&) const = default;
};

struct TranslationStats {
  std::uint64_t total = 0;
  std::uint64_t translated = 0;
  std::uint64_t misses = 0;

  double miss_rate() const { return total == 0 ? 0.0 : static_cast<double>(misses) / static_cast<double>(total); }
};

inline std::optional<VirtualRef> translate_one(const PhysRef& r, const MappingIndex& index, std::uint64_t page_size) {
  auto m = index.lookup(r.addr / page_size, r.cycle);
  if (!m) return std::nullopt;
  return VirtualRef{m->pid, m->virt_page * page_size + r.addr % page_size, r.rw, r.cycle};
}

inline std::pair<std::vector<VirtualRef>, TranslationStats> translate(std::span<const PhysRef> trace,
                                                                     const MappingIndex& index,
                                                                     std::uint64_t page_size = 4096) {
  if (page_size == 0) throw Error(ErrorKind::InvalidConfig, "page_size must be > 0");
  std::vector<VirtualRef> out;
  out.reserve(trace.size());
  TranslationStats st;
  for (const auto& r : trace) {
    ++st.total;
    if (auto v = translate_one(r, index, page_size)) {
      ++st.translated;
      out.push_back(*v);
    } else {
      ++st.misses;
    }
  }
  return {std::move(out), st};
}

}  // namespace dimmtrace
