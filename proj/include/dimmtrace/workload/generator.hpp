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
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dimmtrace/address_mapping.hpp"
#include "dimmtrace/ddr_decoder.hpp"
#include "dimmtrace/dma.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/mapping_index.hpp"
#include "dimmtrace/semantic.hpp"
#include "dimmtrace/trace_codec.hpp"
#include "dimmtrace/types.hpp"
#include "dimmtrace/workload/rng.hpp"
#include "dimmtrace/workload/scenario.hpp"

namespace dimmtrace::workload {

/// One intended normal reference with its ground-truth annotations.
struct LedgerRef {
  PhysRef ref;
  Pid pid = -1;  // -1: not owned by a traced process
  std::optional<std::uint64_t> vaddr;
  RefLabel label = RefLabel::CpuRead;
  std::optional<std::uint64_t> dma_id;
  bool in_window = true;

  bool operator==(const LedgerRef&) const = default;
};

struct ExpectedStats {
  std::array<std::uint64_t, 4> label_counts{};  // in-window, indexed by RefLabel
  std::uint64_t in_window = 0;
  std::uint64_t out_of_window = 0;
  std::uint64_t unmapped_refs = 0;
  std::uint64_t events = 0;
  std::map<std::uint64_t, std::uint64_t> run_length_histogram;
  std::map<std::uint64_t, std::uint64_t> dma_size_histogram;
  std::set<std::int64_t> process_strides;  // cachelines

  double label_percent(RefLabel l) const {
    return in_window == 0 ? 0.0
                          : 100.0 * static_cast<double>(label_counts[static_cast<std::size_t>(l)]) /
                                static_cast<double>(in_window);
  }
  bool operator==(const ExpectedStats&) const = default;
};

/// Generator ground truth: everything a correct pipeline must recover.
struct Ledger {
  std::string name;
  std::uint64_t seed = 0;
  MemConfig mem;
  unsigned channels = 1;
  std::string mapping;
  ConfigSpace config_space;
  std::uint64_t page_size = 4096;
  EventDictionary dictionary;
  std::vector<LedgerRef> refs;
  std::vector<SemanticEvent> events;
  std::vector<PageMapping> page_journal;
  std::vector<DmaRequest> dma_journal;
  ExpectedStats expected;

  AddressMapping address_mapping() const { return AddressMapping::parse(mem, mapping); }

  /// All references the bus carried, normal and config-space, in merge order.
  std::vector<PhysRef> trace() const {
    std::vector<PhysRef> out;
    out.reserve(refs.size() + events.size());
    std::size_t e = 0;
    for (const auto& r : refs) {
      while (e < events.size() && events[e].cycle < r.ref.cycle) out.push_back(event_ref(events[e++]));
      out.push_back(r.ref);
    }
    while (e < events.size()) out.push_back(event_ref(events[e++]));
    return out;
  }

  PhysRef event_ref(const SemanticEvent& ev) const {
    return PhysRef{config_space.base + ev.offset, ev.rw, ev.cycle, ev.channel};
  }
};

struct GeneratedScenario {
  std::vector<std::vector<DdrCommand>> commands;  // per channel
  Ledger ledger;
};

namespace detail {

struct Access {
  std::uint64_t addr;
  Rw rw;
};

inline Rw draw_rw(Rng& rng, std::uint64_t write_ppm) {
  if (write_ppm == 0) return Rw::Read;
  if (write_ppm >= 1'000'000) return Rw::Write;
  return rng.chance_ppm(write_ppm) ? Rw::Write : Rw::Read;
}

// Element-level quicksort trace (Lomuto partition, explicit stack),
// reduced to cachelines with consecutive repeats collapsed.
inline std::vector<Access> quicksort_accesses(const Pattern& p, Rng& rng, std::uint64_t line) {
  std::vector<std::uint64_t> keys(p.elements);
  for (auto& k : keys) k = rng.next();
  std::vector<Access> raw;
  auto touch = [&](std::uint64_t idx, Rw rw) { raw.push_back({p.start + idx * p.elem_bytes, rw}); };
  std::vector<std::pair<std::int64_t, std::int64_t>> stack;
  if (p.elements > 1) stack.emplace_back(0, static_cast<std::int64_t>(p.elements) - 1);
  while (!stack.empty()) {
    auto [lo, hi] = stack.back();
    stack.pop_back();
    if (lo >= hi) continue;
    touch(static_cast<std::uint64_t>(hi), Rw::Read);
    const auto pivot = keys[static_cast<std::size_t>(hi)];
    std::int64_t i = lo;
    for (std::int64_t j = lo; j < hi; ++j) {
      touch(static_cast<std::uint64_t>(j), Rw::Read);
      if (keys[static_cast<std::size_t>(j)] < pivot) {
        if (i != j) {
          std::swap(keys[static_cast<std::size_t>(i)], keys[static_cast<std::size_t>(j)]);
          touch(static_cast<std::uint64_t>(i), Rw::Write);
          touch(static_cast<std::uint64_t>(j), Rw::Write);
        }
        ++i;
      }
    }
    std::swap(keys[static_cast<std::size_t>(i)], keys[static_cast<std::size_t>(hi)]);
    touch(static_cast<std::uint64_t>(i), Rw::Write);
    touch(static_cast<std::uint64_t>(hi), Rw::Write);
    stack.emplace_back(lo, i - 1);
    stack.emplace_back(i + 1, hi);
  }
  std::vector<Access> out;
  for (const auto& a : raw) {
    const std::uint64_t l = a.addr / line * line;
    if (!out.empty() && out.back().addr == l) {
      if (a.rw == Rw::Write) out.back().rw = Rw::Write;
      continue;
    }
    out.push_back({l, a.rw});
  }
  return out;
}

inline std::vector<Access> expand_pattern(const Pattern& p, Rng& rng, std::uint64_t line) {
  std::vector<Access> out;
  auto align = [line](std::uint64_t a) { return a / line * line; };
  switch (p.kind) {
    case PatternKind::Sequential:
      out.reserve(p.count);
      for (std::uint64_t k = 0; k < p.count; ++k) out.push_back({align(p.start + k * p.stride), draw_rw(rng, p.write_ppm)});
      break;
    case PatternKind::Random:
      out.reserve(p.count);
      for (std::uint64_t k = 0; k < p.count; ++k)
        out.push_back({align(p.start + rng.below(p.range)), draw_rw(rng, p.write_ppm)});
      break;
    case PatternKind::MultiStream:
      out.reserve(p.count);
      for (std::uint64_t k = 0; k < p.count; ++k) {
        const std::uint64_t s = k % p.streams;
        const std::uint64_t idx = k / p.streams;
        out.push_back({align(p.start + s * p.spacing + idx * p.stride), draw_rw(rng, p.write_ppm)});
      }
      break;
    case PatternKind::Quicksort:
      out = quicksort_accesses(p, rng, line);
      break;
    case PatternKind::Copy:
      for (std::uint64_t off = 0; off < p.bytes; off += line) {
        out.push_back({align(p.start + off), Rw::Read});
        out.push_back({align(p.dst + off), Rw::Write});
      }
      break;
  }
  return out;
}

/// A schedulable unit: either a normal reference or a config-space event.
struct Item {
  bool is_event = false;
  LedgerRef ref;
  std::uint64_t event_offset = 0;
  std::optional<std::uint64_t> dma_begin;  // request id whose begin tag this is
  std::optional<std::uint64_t> dma_end;
};

class PagePool {
 public:
  PagePool(std::uint64_t first_page, std::uint64_t pages) : first_(first_page), used_(pages, false) {}

  std::uint64_t take(PageAssignment how, Rng& rng) {
    if (taken_ == used_.size()) throw Error(ErrorKind::SpecError, "page_pool: exhausted");
    std::uint64_t idx = 0;
    if (how == PageAssignment::Linear) {
      while (used_[cursor_]) ++cursor_;
      idx = cursor_;
    } else {
      idx = rng.below(used_.size());
      for (int tries = 0; used_[idx] && tries < 64; ++tries) idx = rng.below(used_.size());
      while (used_[idx]) idx = (idx + 1) % used_.size();
    }
    used_[idx] = true;
    ++taken_;
    return first_ + idx;
  }

 private:
  std::uint64_t first_;
  std::vector<bool> used_;
  std::uint64_t cursor_ = 0;
  std::uint64_t taken_ = 0;
};

}  // namespace detail

/// Synthesizes per-channel DDR command streams and the matching ledger.
///
/// Every scheduled item occupies one slot of `slot_cycles`: PRECHARGE at
/// the slot start when another row is open, ACTIVATE one cycle later when
/// the row is not open, then the column command two cycles in. Actors in a
/// phase are interleaved round-robin, `quantum` items per turn.
inline GeneratedScenario generate(const ScenarioSpec& spec) {
  using namespace detail;
  GeneratedScenario out;
  Ledger& L = out.ledger;
  Rng rng(spec.seed);

  L.name = spec.name;
  L.seed = spec.seed;
  L.mem = spec.mem;
  L.channels = spec.channels;
  L.page_size = spec.page_size;
  const unsigned channel_bits = static_cast<unsigned>(std::countr_zero(spec.channels));
  L.mapping = spec.mapping.empty()
                  ? std::string("row,bank,col") + (channel_bits ? ",channel:" + std::to_string(channel_bits) : "")
                  : spec.mapping;
  AddressMapping mapping;
  try {
    mapping = AddressMapping::parse(spec.mem, L.mapping);
  } catch (const Error& e) {
    throw Error(ErrorKind::SpecError, std::string("mapping: ") + e.what());
  }
  if (mapping.channel_bits() != channel_bits)
    throw Error(ErrorKind::SpecError, "mapping: channel bits do not match channels");
  if (mapping.address_bits() - mapping.offset_bits() > packed::kLineBits)
    throw Error(ErrorKind::SpecError, "mem: physical space exceeds the packed trace's cacheline index range");
  const std::uint64_t mem_size = std::uint64_t{1} << mapping.address_bits();
  const std::uint64_t line = spec.mem.cacheline_bytes;

  L.config_space.stride = line;
  L.config_space.size = spec.config_space_size;
  L.config_space.base = spec.config_space_base.value_or(mem_size - std::min(mem_size, spec.config_space_size));
  try {
    L.config_space.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::SpecError, std::string("config_space: ") + e.what());
  }
  if (L.config_space.base + L.config_space.size > mem_size)
    throw Error(ErrorKind::SpecError, "config_space: extends beyond physical memory");

  // Dictionary: inner commands, declared user events, then DMA tag slots.
  L.dictionary.define(EventDictionary::kBeginOffset, "BEGIN_TRACING");
  L.dictionary.define(EventDictionary::kEndOffset, "END_TRACING");
  L.dictionary.define(EventDictionary::kMarkerOffset, "INSERT_MARKER");
  std::uint64_t next_user_slot = 0;
  for (const auto& ph : spec.phases)
    for (const auto& ev : ph.events) {
      if (ev.offset >= L.config_space.size)
        throw Error(ErrorKind::SpecError, "events: offset " + EventDictionary::hex(ev.offset) + " outside config space");
      if (ev.offset >= kUserRegionOffset) {
        L.dictionary.define(ev.offset, ev.name);
        next_user_slot = std::max(next_user_slot, (ev.offset - kUserRegionOffset) / line + 1);
      }
    }
  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> dma_slots;
  std::set<std::uint64_t> dma_ids;
  for (const auto& ph : spec.phases)
    for (const auto& a : ph.actors) {
      if (a.kind != ActorKind::Dma) continue;
      if (!dma_ids.insert(a.dma.id).second)
        throw Error(ErrorKind::SpecError, "dma: duplicate request id " + std::to_string(a.dma.id));
      const std::uint64_t b = kUserRegionOffset + next_user_slot++ * line;
      const std::uint64_t e = kUserRegionOffset + next_user_slot++ * line;
      if (e >= L.config_space.size) throw Error(ErrorKind::SpecError, "dma: config space too small for tags");
      L.dictionary.define(b, DmaTagMap::begin_name(a.dma.id));
      L.dictionary.define(e, DmaTagMap::end_name(a.dma.id));
      dma_slots[a.dma.id] = {b, e};
    }

  // Expand actors into item queues.
  std::map<std::pair<Pid, std::uint64_t>, std::uint64_t> page_table;
  std::vector<std::vector<std::vector<Item>>> phase_items(spec.phases.size());
  const std::uint64_t pool_first = spec.page_pool_base / spec.page_size;
  // Untranslated traffic must stay off process pages.
  auto in_pool = [&](PhysAddr a) {
    const std::uint64_t pg = a / spec.page_size;
    return pg >= pool_first && pg - pool_first < spec.page_pool_pages;
  };
  detail::PagePool pool(pool_first, spec.page_pool_pages);
  for (std::size_t pi = 0; pi < spec.phases.size(); ++pi) {
    for (std::size_t ai = 0; ai < spec.phases[pi].actors.size(); ++ai) {
      const auto& a = spec.phases[pi].actors[ai];
      const std::string where = "phases[" + std::to_string(pi) + "].actors[" + std::to_string(ai) + "]";
      std::vector<Item> items;
      if (a.kind == ActorKind::Dma) {
        if (a.dma.buf_start % line != 0 || a.dma.buf_size % line != 0)
          throw Error(ErrorKind::SpecError, where + ": DMA buffer must be cacheline aligned");
        if (a.dma.buf_start + a.dma.buf_size > L.config_space.base)
          throw Error(ErrorKind::SpecError, where + ": DMA buffer outside ordinary memory");
        const std::uint64_t pool_lo = pool_first * spec.page_size;
        const std::uint64_t pool_hi = pool_lo + spec.page_pool_pages * spec.page_size;
        if (a.dma.buf_start < pool_hi && a.dma.buf_start + a.dma.buf_size > pool_lo)
          throw Error(ErrorKind::SpecError, where + ": DMA buffer overlaps the page pool");
        Item b;
        b.is_event = true;
        b.event_offset = dma_slots[a.dma.id].first;
        b.dma_begin = a.dma.id;
        items.push_back(b);
        for (std::uint64_t off = 0; off < a.dma.buf_size; off += line) {
          Item it;
          it.ref.ref.addr = a.dma.buf_start + off;
          it.ref.ref.rw = a.dma.dir == DmaDir::Read ? Rw::Read : Rw::Write;
          it.ref.label = a.dma.dir == DmaDir::Read ? RefLabel::DmaRead : RefLabel::DmaWrite;
          it.ref.dma_id = a.dma.id;
          items.push_back(it);
        }
        Item e;
        e.is_event = true;
        e.event_offset = dma_slots[a.dma.id].second;
        e.dma_end = a.dma.id;
        items.push_back(e);
        DmaRequest req = a.dma;
        L.dma_journal.push_back(req);
      } else {
        for (const auto& acc : expand_pattern(a.pattern, rng, line)) {
          Item it;
          it.ref.ref.rw = acc.rw;
          it.ref.label = cpu_label(acc.rw);
          if (a.kind == ActorKind::Process) {
            const std::uint64_t vpage = acc.addr / spec.page_size;
            auto [pos, fresh] = page_table.try_emplace({a.pid, vpage}, 0);
            if (fresh) {
              if (spec.page_pool_pages == 0) throw Error(ErrorKind::SpecError, where + ": process needs a page_pool");
              pos->second = pool.take(a.pages, rng);
              L.page_journal.push_back({0, a.pid, vpage, pos->second,
                                        (static_cast<std::uint64_t>(a.pid) << 32) | ((vpage * 8) & 0xFFFFFFFFu)});
            }
            it.ref.pid = a.pid;
            it.ref.vaddr = acc.addr;
            it.ref.ref.addr = pos->second * spec.page_size + acc.addr % spec.page_size;
          } else {
            it.ref.ref.addr = acc.addr;
            if (in_pool(acc.addr)) throw Error(ErrorKind::SpecError, where + ": raw reference inside the page pool");
          }
          if (it.ref.ref.addr >= L.config_space.base)
            throw Error(ErrorKind::SpecError, where + ": reference beyond ordinary memory");
          items.push_back(it);
        }
      }
      phase_items[pi].push_back(std::move(items));
    }
  }

  // Schedule and emit commands.
  out.commands.assign(spec.channels, {});
  std::vector<BankStates> banks(spec.channels, BankStates(spec.mem.bank_count));
  Cycle t = spec.start_cycle;
  bool window_open = false;
  bool any_tracing_event = false;
  std::unordered_map<std::uint64_t, std::size_t> dma_index;
  for (std::size_t i = 0; i < L.dma_journal.size(); ++i) dma_index[L.dma_journal[i].id] = i;

  auto emit = [&](Item& it) {
    const PhysAddr addr = it.is_event ? L.config_space.base + it.event_offset : it.ref.ref.addr;
    const auto coord = mapping.decompose(addr);
    auto& cmds = out.commands[coord.channel];
    auto& bs = banks[coord.channel];
    const auto open = bs.open_row(coord.bank);
    if (open != coord.row) {
      if (open) {
        cmds.push_back(DdrCommand::precharge(t, coord.bank));
        bs.precharge(coord.bank);
      }
      cmds.push_back(DdrCommand::activate(t + 1, coord.bank, coord.row));
      bs.activate(coord.bank, coord.row);
    }
    const Cycle c = t + 2;
    const Rw rw = it.is_event ? Rw::Read : it.ref.ref.rw;
    cmds.push_back(rw == Rw::Read ? DdrCommand::read(c, coord.bank, coord.col) : DdrCommand::write(c, coord.bank, coord.col));

    if (it.is_event) {
      auto ev = classify_ref(PhysRef{addr, rw, c, coord.channel}, L.config_space, L.dictionary);
      if (ev->kind == EventKind::BeginTracing) {
        any_tracing_event = true;
        window_open = true;
      } else if (ev->kind == EventKind::EndTracing) {
        any_tracing_event = true;
        window_open = false;
      }
      if (it.dma_begin) L.dma_journal[dma_index[*it.dma_begin]].cycle_begin = c;
      if (it.dma_end) L.dma_journal[dma_index[*it.dma_end]].cycle_end = c;
      L.events.push_back(*ev);
    } else {
      it.ref.ref.cycle = c;
      it.ref.ref.channel = coord.channel;
      it.ref.in_window = window_open;
      L.refs.push_back(it.ref);
    }
    t += spec.slot_cycles + (spec.jitter_cycles ? rng.below(spec.jitter_cycles + 1) : 0);
  };
  auto emit_inner = [&](std::uint64_t offset) {
    Item it;
    it.is_event = true;
    it.event_offset = offset;
    emit(it);
  };

  if (spec.tracing) emit_inner(EventDictionary::kBeginOffset);
  for (std::size_t pi = 0; pi < spec.phases.size(); ++pi) {
    const auto& ph = spec.phases[pi];
    t += ph.idle_cycles;
    auto& queues = phase_items[pi];
    std::vector<std::size_t> cursor(queues.size(), 0);
    std::vector<EventSpec> events = ph.events;
    std::stable_sort(events.begin(), events.end(), [](const EventSpec& a, const EventSpec& b) { return a.at < b.at; });
    std::size_t next_event = 0;
    std::uint64_t emitted = 0;
    auto flush_events = [&](bool all) {
      while (next_event < events.size() && (all || events[next_event].at <= emitted)) emit_inner(events[next_event++].offset);
    };
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t q = 0; q < queues.size(); ++q) {
        if (cursor[q] == queues[q].size()) continue;
        const std::uint64_t turn = ph.quantum_mode == QuantumMode::Fixed ? ph.quantum : 1 + rng.below(ph.quantum);
        for (std::uint64_t k = 0; k < turn && cursor[q] < queues[q].size(); ++k) {
          flush_events(false);
          emit(queues[q][cursor[q]++]);
          ++emitted;
          progress = true;
        }
      }
    }
    flush_events(true);
  }
  if (spec.tracing) emit_inner(EventDictionary::kEndOffset);

  if (!any_tracing_event)
    for (auto& r : L.refs) r.in_window = true;

  // CPU references must stay clear of in-flight DMA buffers.
  for (const auto& r : L.refs) {
    if (r.dma_id) continue;
    for (const auto& d : L.dma_journal)
      if (d.cycle_begin <= r.ref.cycle && r.ref.cycle < d.cycle_end && d.covers(r.ref.addr))
        throw Error(ErrorKind::SpecError, "cpu reference at cycle " + std::to_string(r.ref.cycle) +
                                              " touches in-flight DMA buffer " + std::to_string(d.id));
  }

  // Expected statistics, by construction.
  auto& ex = L.expected;
  ex.events = L.events.size();
  std::optional<Pid> run_pid;
  std::uint64_t run = 0;
  for (const auto& r : L.refs) {
    if (r.in_window) {
      ++ex.in_window;
      ++ex.label_counts[static_cast<std::size_t>(r.label)];
    } else {
      ++ex.out_of_window;
    }
    if (r.pid < 0) {
      ++ex.unmapped_refs;
      continue;
    }
    if (run_pid && *run_pid == r.pid) {
      ++run;
    } else {
      if (run) ++ex.run_length_histogram[run];
      run_pid = r.pid;
      run = 1;
    }
  }
  if (run) ++ex.run_length_histogram[run];
  for (const auto& d : L.dma_journal) ++ex.dma_size_histogram[d.buf_size];
  for (const auto& ph : spec.phases)
    for (const auto& a : ph.actors)
      if (a.kind == ActorKind::Process &&
          (a.pattern.kind == PatternKind::Sequential || a.pattern.kind == PatternKind::MultiStream))
        ex.process_strides.insert(static_cast<std::int64_t>(a.pattern.stride / line));
  return out;
}

}  // namespace dimmtrace::workload
