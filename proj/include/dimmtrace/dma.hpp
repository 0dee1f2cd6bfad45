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
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dimmtrace/cdf.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/mapping_index.hpp"
#include "dimmtrace/semantic.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

enum class DmaOwner : std::uint8_t { Disk, Nic };
enum class DmaDir : std::uint8_t { Read, Write };

inline std::string to_string(DmaOwner o) { return o == DmaOwner::Disk ? "disk" : "nic"; }
inline std::string to_string(DmaDir d) { return d == DmaDir::Read ? "read" : "write"; }

inline DmaOwner parse_dma_owner(const std::string& s) {
  if (s == "disk" || s == "DISK") return DmaOwner::Disk;
  if (s == "nic" || s == "NIC") return DmaOwner::Nic;
  throw Error(ErrorKind::ParseError, "unknown DMA owner '" + s + "'");
}

inline DmaDir parse_dma_dir(const std::string& s) {
  if (s == "read" || s == "DMA_READ") return DmaDir::Read;
  if (s == "write" || s == "DMA_WRITE") return DmaDir::Write;
  throw Error(ErrorKind::ParseError, "unknown DMA direction '" + s + "'");
}

/// A DMA buffer as recorded by an instrumented driver. A DMA read moves
/// memory to the device (memory reads); a DMA write fills memory.
struct DmaRequest {
  std::uint64_t id = 0;
  DmaOwner owner = DmaOwner::Disk;
  DmaDir dir = DmaDir::Read;
  PhysAddr buf_start = 0;
  std::uint64_t buf_size = 0;
  Cycle cycle_begin = 0;
  Cycle cycle_end = 0;

  bool covers(PhysAddr a) const { return a >= buf_start && a - buf_start < buf_size; }
  bool operator==(const DmaRequest&) const = default;
};

enum class RefLabel : std::uint8_t { CpuRead, CpuWrite, DmaRead, DmaWrite };

inline std::string to_string(RefLabel l) {
  switch (l) {
    case RefLabel::CpuRead: return "CPU_READ";
    case RefLabel::CpuWrite: return "CPU_WRITE";
    case RefLabel::DmaRead: return "DMA_READ";
    case RefLabel::DmaWrite: return "DMA_WRITE";
  }
  return "?";
}

inline RefLabel parse_ref_label(const std::string& s) {
  if (s == "CPU_READ") return RefLabel::CpuRead;
  if (s == "CPU_WRITE") return RefLabel::CpuWrite;
  if (s == "DMA_READ") return RefLabel::DmaRead;
  if (s == "DMA_WRITE") return RefLabel::DmaWrite;
  throw Error(ErrorKind::ParseError, "unknown label '" + s + "'");
}

inline RefLabel cpu_label(Rw rw) { return rw == Rw::Read ? RefLabel::CpuRead : RefLabel::CpuWrite; }

struct LabeledRef {
  PhysRef ref;
  RefLabel label = RefLabel::CpuRead;
  bool in_window = true;
  std::optional<Pid> pid;
  std::optional<std::uint64_t> virt_addr;
  std::optional<std::uint64_t> dma_id;

  bool operator==(const LabeledRef&) const = default;
};

/// Maps user-event ids to DMA request tags. Dictionary names of the form
/// "DMA_BEGIN_TAG:<id>" and "DMA_END_TAG:<id>" declare the tag slots.
class DmaTagMap {
 public:
  struct Tag {
    std::uint64_t request;
    bool begin;
  };

  static DmaTagMap from_dictionary(const EventDictionary& dict, const ConfigSpace& cs) {
    DmaTagMap m;
    for (const auto& [off, name] : dict.slots()) {
      if (off < kUserRegionOffset) continue;
      const std::uint64_t user_id = (off - kUserRegionOffset) / cs.stride;
      if (auto id = suffix_id(name, "DMA_BEGIN_TAG:")) m.add(user_id, {*id, true});
      else if (auto id2 = suffix_id(name, "DMA_END_TAG:")) m.add(user_id, {*id2, false});
    }
    return m;
  }

  void add(std::uint64_t user_id, Tag t) { tags_[user_id] = t; }

  std::optional<Tag> find(std::uint64_t user_id) const {
    auto it = tags_.find(user_id);
    if (it == tags_.end()) return std::nullopt;
    return it->second;
  }

  static std::string begin_name(std::uint64_t id) { return "DMA_BEGIN_TAG:" + std::to_string(id); }
  static std::string end_name(std::uint64_t id) { return "DMA_END_TAG:" + std::to_string(id); }

 private:
  static std::optional<std::uint64_t> suffix_id(const std::string& name, const std::string& prefix) {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    try {
      return std::stoull(name.substr(prefix.size()));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  std::unordered_map<std::uint64_t, Tag> tags_;
};

struct DmaRequestStat {
  std::uint64_t id = 0;
  DmaOwner owner = DmaOwner::Disk;
  DmaDir dir = DmaDir::Read;
  std::uint64_t buf_size = 0;
  Cycle active_begin = 0;
  Cycle active_end = 0;
  std::uint64_t transferred_bytes = 0;
};

struct DmaSummary {
  std::array<std::uint64_t, 4> label_counts{};  // indexed by RefLabel, in-window only
  std::uint64_t in_window = 0;
  std::uint64_t out_of_window = 0;
  std::vector<DmaRequestStat> requests;
  std::map<std::pair<DmaOwner, DmaDir>, double> mean_request_size;
  std::vector<CdfPoint> request_size_cdf;

  std::uint64_t count(RefLabel l) const { return label_counts[static_cast<std::size_t>(l)]; }
  double percent(RefLabel l) const {
    return in_window == 0 ? 0.0 : 100.0 * static_cast<double>(count(l)) / static_cast<double>(in_window);
  }
};

struct DmaClassification {
  std::vector<LabeledRef> refs;
  DmaSummary summary;
  Diagnostics diagnostics;
};

/// Active intervals per request, resolved from tag events. Requests without
/// tags fall back to their journal cycles; a missing END leaves the request
/// open to the end of the trace.
inline std::vector<DmaRequestStat> resolve_dma_activity(std::span<const DmaRequest> requests,
                                                        std::span<const SemanticEvent> events,
                                                        const DmaTagMap& tags, Diagnostics& diag) {
  std::unordered_map<std::uint64_t, Cycle> begins, ends;
  for (const auto& e : events) {
    if (e.kind != EventKind::User) continue;
    auto t = tags.find(e.user_id);
    if (!t) continue;
    auto& slot = t->begin ? begins : ends;
    slot.emplace(t->request, e.cycle);
  }
  std::vector<DmaRequestStat> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    DmaRequestStat s{r.id, r.owner, r.dir, r.buf_size, r.cycle_begin, r.cycle_end, 0};
    auto b = begins.find(r.id);
    auto e = ends.find(r.id);
    if (b == begins.end()) {
      diag.add(Warning::MissingDmaTag);
    } else {
      s.active_begin = b->second;
      if (e == ends.end()) {
        diag.add(Warning::UnterminatedDma);
        s.active_end = kOpenEnd;
      } else {
        s.active_end = e->second;
      }
    }
    out.push_back(s);
  }
  return out;
}

/// Labels references as CPU or DMA traffic. A reference is DMA traffic when
/// it falls inside an active request's buffer; overlapping active buffers
/// resolve to the most recently begun request. Only in-window references
/// count toward the summary.
inline DmaClassification classify_dma(std::span<const PhysRef> trace, std::span<const DmaRequest> requests,
                                      std::span<const SemanticEvent> events, const DmaTagMap& tags,
                                      const WindowSet& windows, std::uint64_t line_bytes = 64) {
  DmaClassification out;
  auto& sum = out.summary;
  sum.requests = resolve_dma_activity(requests, events, tags, out.diagnostics);
  auto& stats = sum.requests;

  std::vector<std::size_t> by_begin(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) by_begin[i] = i;
  std::stable_sort(by_begin.begin(), by_begin.end(),
                   [&](std::size_t a, std::size_t b) { return stats[a].active_begin < stats[b].active_begin; });

  std::vector<std::size_t> active;  // ascending begin, so the back is the latest
  std::size_t next = 0;
  out.refs.reserve(trace.size());
  for (const auto& r : trace) {
    while (next < by_begin.size() && stats[by_begin[next]].active_begin <= r.cycle) active.push_back(by_begin[next++]);
    std::erase_if(active, [&](std::size_t i) { return stats[i].active_end <= r.cycle; });

    LabeledRef lr;
    lr.ref = r;
    lr.in_window = windows.contains(r.cycle);
    lr.label = cpu_label(r.rw);
    unsigned hits = 0;
    for (auto it = active.rbegin(); it != active.rend(); ++it) {
      const auto& req = requests[*it];
      if (!req.covers(r.addr)) continue;
      if (hits++ == 0) {
        lr.label = req.dir == DmaDir::Read ? RefLabel::DmaRead : RefLabel::DmaWrite;
        lr.dma_id = req.id;
        if (lr.in_window) stats[*it].transferred_bytes += line_bytes;
      }
    }
    if (hits > 1) out.diagnostics.add(Warning::OverlappingDma);

    if (lr.in_window) {
      ++sum.in_window;
      ++sum.label_counts[static_cast<std::size_t>(lr.label)];
    } else {
      ++sum.out_of_window;
    }
    out.refs.push_back(lr);
  }

  std::map<std::pair<DmaOwner, DmaDir>, std::pair<double, std::uint64_t>> acc;
  std::map<std::uint64_t, std::uint64_t> sizes;
  for (const auto& r : requests) {
    auto& a = acc[{r.owner, r.dir}];
    a.first += static_cast<double>(r.buf_size);
    ++a.second;
    ++sizes[r.buf_size];
  }
  for (const auto& [key, a] : acc) sum.mean_request_size[key] = a.first / static_cast<double>(a.second);
  sum.request_size_cdf = make_cdf(sizes);
  return out;
}

}  // namespace dimmtrace
