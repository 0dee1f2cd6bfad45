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

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dimmtrace/binary_io.hpp"
#include "dimmtrace/journal_io.hpp"
#include "dimmtrace/workload/generator.hpp"

namespace dimmtrace::workload {

inline constexpr int kLedgerSchemaVersion = 1;

// Refs are stored as compact arrays:
//   [cycle, channel, addr, rw(0|1), pid, vaddr|null, label, dma_id|null, in_window(0|1)]
// Events as [cycle, channel, offset, kind, user_id].

inline nlohmann::json ledger_to_json(const Ledger& L) {
  using nlohmann::json;
  json refs = json::array();
  for (const auto& r : L.refs) {
    refs.push_back(json::array({r.ref.cycle, r.ref.channel, r.ref.addr, r.ref.rw == Rw::Write ? 1 : 0, r.pid,
                                r.vaddr ? json(*r.vaddr) : json(nullptr), to_string(r.label),
                                r.dma_id ? json(*r.dma_id) : json(nullptr), r.in_window ? 1 : 0}));
  }
  json events = json::array();
  for (const auto& e : L.events)
    events.push_back(json::array({e.cycle, e.channel, e.offset, to_string(e.kind), e.user_id}));
  json pages = json::array();
  for (const auto& m : L.page_journal) pages.push_back(to_json(m));
  json dma = json::array();
  for (const auto& d : L.dma_journal) dma.push_back(to_json(d));

  const auto& ex = L.expected;
  json labels = json::object();
  for (auto l : {RefLabel::CpuRead, RefLabel::CpuWrite, RefLabel::DmaRead, RefLabel::DmaWrite})
    labels[to_string(l)] = ex.label_counts[static_cast<std::size_t>(l)];
  auto hist = [](const std::map<std::uint64_t, std::uint64_t>& m) {
    json a = json::array();
    for (const auto& [k, v] : m) a.push_back(json::array({k, v}));
    return a;
  };
  json expected = {{"label_counts", labels},
                   {"in_window", ex.in_window},
                   {"out_of_window", ex.out_of_window},
                   {"unmapped_refs", ex.unmapped_refs},
                   {"events", ex.events},
                   {"run_length_histogram", hist(ex.run_length_histogram)},
                   {"dma_size_histogram", hist(ex.dma_size_histogram)},
                   {"process_strides", json(std::vector<std::int64_t>(ex.process_strides.begin(), ex.process_strides.end()))}};

  return {{"schema_version", kLedgerSchemaVersion},
          {"name", L.name},
          {"seed", L.seed},
          {"mem", mem_config_to_json(L.mem)},
          {"channels", L.channels},
          {"mapping", L.mapping},
          {"config_space", {{"base", L.config_space.base}, {"size", L.config_space.size}, {"stride", L.config_space.stride}}},
          {"page_size", L.page_size},
          {"dictionary", L.dictionary.to_json()},
          {"refs", refs},
          {"events", events},
          {"page_journal", pages},
          {"dma_journal", dma},
          {"expected", expected}};
}

inline Ledger ledger_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kLedgerSchemaVersion)
      throw Error(ErrorKind::UnsupportedVersion, "ledger schema version mismatch");
    Ledger L;
    L.name = j.at("name").get<std::string>();
    L.seed = j.at("seed").get<std::uint64_t>();
    L.mem = detail::parse_mem(j.at("mem"), "mem");
    L.channels = j.at("channels").get<unsigned>();
    L.mapping = j.at("mapping").get<std::string>();
    const auto& cs = j.at("config_space");
    L.config_space = {cs.at("base").get<std::uint64_t>(), cs.at("size").get<std::uint64_t>(),
                      cs.at("stride").get<std::uint64_t>()};
    L.page_size = j.at("page_size").get<std::uint64_t>();
    L.dictionary = EventDictionary::from_json(j.at("dictionary"));
    for (const auto& a : j.at("refs")) {
      LedgerRef r;
      r.ref.cycle = a[0].get<Cycle>();
      r.ref.channel = a[1].get<ChannelId>();
      r.ref.addr = a[2].get<PhysAddr>();
      r.ref.rw = a[3].get<int>() ? Rw::Write : Rw::Read;
      r.pid = a[4].get<Pid>();
      if (!a[5].is_null()) r.vaddr = a[5].get<std::uint64_t>();
      r.label = parse_ref_label(a[6].get<std::string>());
      if (!a[7].is_null()) r.dma_id = a[7].get<std::uint64_t>();
      r.in_window = a[8].get<int>() != 0;
      L.refs.push_back(r);
    }
    for (const auto& a : j.at("events")) {
      SemanticEvent e;
      e.cycle = a[0].get<Cycle>();
      e.channel = a[1].get<ChannelId>();
      e.offset = a[2].get<std::uint64_t>();
      e.kind = parse_event_kind(a[3].get<std::string>());
      e.user_id = a[4].get<std::uint64_t>();
      L.events.push_back(e);
    }
    PageJournal pj;
    for (const auto& m : j.at("page_journal")) parse_page_journal_line(m, pj);
    L.page_journal = std::move(pj.maps);
    for (const auto& d : j.at("dma_journal")) L.dma_journal.push_back(dma_request_from_json(d));

    const auto& ex = j.at("expected");
    auto& E = L.expected;
    for (auto l : {RefLabel::CpuRead, RefLabel::CpuWrite, RefLabel::DmaRead, RefLabel::DmaWrite})
      E.label_counts[static_cast<std::size_t>(l)] = ex.at("label_counts").at(to_string(l)).get<std::uint64_t>();
    E.in_window = ex.at("in_window").get<std::uint64_t>();
    E.out_of_window = ex.at("out_of_window").get<std::uint64_t>();
    E.unmapped_refs = ex.at("unmapped_refs").get<std::uint64_t>();
    E.events = ex.at("events").get<std::uint64_t>();
    for (const auto& p : ex.at("run_length_histogram")) E.run_length_histogram[p[0].get<std::uint64_t>()] = p[1].get<std::uint64_t>();
    for (const auto& p : ex.at("dma_size_histogram")) E.dma_size_histogram[p[0].get<std::uint64_t>()] = p[1].get<std::uint64_t>();
    for (const auto& s : ex.at("process_strides")) E.process_strides.insert(s.get<std::int64_t>());
    return L;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("ledger: ") + e.what());
  }
}

inline void write_ledger(const std::filesystem::path& path, const Ledger& L) {
  write_text_atomic(path, ledger_to_json(L).dump() + "\n");
}

inline Ledger read_ledger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return ledger_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace dimmtrace::workload
