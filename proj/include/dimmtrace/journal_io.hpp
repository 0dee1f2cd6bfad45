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
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dimmtrace/binary_io.hpp"
#include "dimmtrace/dma.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/mapping_index.hpp"
#include "dimmtrace/semantic.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

// Text formats: JSON-Lines journals and versioned CSV reference files.

namespace io_detail {

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    try {
      fn(line, n);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError) throw;
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(n) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

inline std::uint64_t field_u64(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw Error(ErrorKind::ParseError, std::string("'") + key + "' must be a non-negative integer");
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 0);
  if (used != s.size() || s.empty() || s[0] == '-') throw Error(ErrorKind::ParseError, "bad integer '" + s + "'");
  return v;
}

inline std::int64_t parse_i64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoll(s, &used, 10);
  if (used != s.size()) throw Error(ErrorKind::ParseError, "bad integer '" + s + "'");
  return v;
}

inline Rw parse_rw(const std::string& s) {
  if (s == "R") return Rw::Read;
  if (s == "W") return Rw::Write;
  throw Error(ErrorKind::ParseError, "rw must be R or W, got '" + s + "'");
}

inline const char* rw_str(Rw rw) { return rw == Rw::Read ? "R" : "W"; }

inline void expect_header(const std::filesystem::path& path, const std::string& want) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::string first;
  std::getline(in, first);
  if (first != want) throw Error(ErrorKind::ParseError, path.string() + ": expected header '" + want + "'");
}

}  // namespace io_detail

// ---- page-mapping journal ----------------------------------------------

struct PageJournal {
  std::vector<PageMapping> maps;
  std::vector<PageUnmap> unmaps;
};

inline nlohmann::json to_json(const PageMapping& m) {
  return {{"cycle", m.cycle}, {"pid", m.pid}, {"virt_page", m.virt_page}, {"phys_page", m.phys_page},
          {"pte_addr", m.pte_addr}};
}

inline nlohmann::json to_json(const PageUnmap& u) {
  return {{"cycle", u.cycle}, {"phys_page", u.phys_page}, {"unmap", true}};
}

inline void parse_page_journal_line(const nlohmann::json& j, PageJournal& out) {
  if (j.value("unmap", false)) {
    out.unmaps.push_back({io_detail::field_u64(j, "cycle"), io_detail::field_u64(j, "phys_page")});
    return;
  }
  if (!j.contains("pid") || !j.at("pid").is_number_integer()) throw Error(ErrorKind::ParseError, "missing 'pid'");
  out.maps.push_back({io_detail::field_u64(j, "cycle"), j.at("pid").get<Pid>(), io_detail::field_u64(j, "virt_page"),
                      io_detail::field_u64(j, "phys_page"), io_detail::field_u64(j, "pte_addr")});
}

inline PageJournal read_page_journal(const std::filesystem::path& path) {
  PageJournal out;
  io_detail::for_each_line(path, [&](const std::string& line, std::size_t) {
    parse_page_journal_line(nlohmann::json::parse(line), out);
  });
  return out;
}

inline void write_page_journal(const std::filesystem::path& path, const PageJournal& j) {
  AtomicFileWriter w(path);
  for (const auto& m : j.maps) w.stream() << to_json(m).dump() << '\n';
  for (const auto& u : j.unmaps) w.stream() << to_json(u).dump() << '\n';
  w.commit();
}

// ---- DMA journal --------------------------------------------------------

inline nlohmann::json to_json(const DmaRequest& r) {
  return {{"id", r.id},
          {"owner", to_string(r.owner)},
          {"dir", to_string(r.dir)},
          {"buf_start", r.buf_start},
          {"buf_size", r.buf_size},
          {"cycle_begin", r.cycle_begin},
          {"cycle_end", r.cycle_end}};
}

inline DmaRequest dma_request_from_json(const nlohmann::json& j) {
  DmaRequest r;
  r.id = io_detail::field_u64(j, "id");
  r.owner = parse_dma_owner(j.at("owner").get<std::string>());
  r.dir = parse_dma_dir(j.at("dir").get<std::string>());
  r.buf_start = io_detail::field_u64(j, "buf_start");
  r.buf_size = io_detail::field_u64(j, "buf_size");
  r.cycle_begin = io_detail::field_u64(j, "cycle_begin");
  r.cycle_end = io_detail::field_u64(j, "cycle_end");
  return r;
}

inline std::vector<DmaRequest> read_dma_journal(const std::filesystem::path& path) {
  std::vector<DmaRequest> out;
  io_detail::for_each_line(path, [&](const std::string& line, std::size_t) {
    out.push_back(dma_request_from_json(nlohmann::json::parse(line)));
  });
  return out;
}

inline void write_dma_journal(const std::filesystem::path& path, std::span<const DmaRequest> reqs) {
  AtomicFileWriter w(path);
  for (const auto& r : reqs) w.stream() << to_json(r).dump() << '\n';
  w.commit();
}

// ---- physical reference CSV --------------------------------------------

inline constexpr const char* kRefsHeader = "# dimmtrace-refs v1";
inline constexpr const char* kRefsColumns = "cycle,channel,addr,rw";

inline void write_refs(std::ostream& os, std::span<const PhysRef> refs) {
  os << kRefsHeader << '\n' << kRefsColumns << '\n';
  for (const auto& r : refs) os << r.cycle << ',' << r.channel << ",0x" << std::hex << r.addr << std::dec << ',' << io_detail::rw_str(r.rw) << '\n';
}

inline void write_refs_file(const std::filesystem::path& path, std::span<const PhysRef> refs) {
  AtomicFileWriter w(path);
  write_refs(w.stream(), refs);
  w.commit();
}

inline std::vector<PhysRef> read_refs_file(const std::filesystem::path& path) {
  io_detail::expect_header(path, kRefsHeader);
  std::vector<PhysRef> out;
  io_detail::for_each_line(path, [&](const std::string& line, std::size_t) {
    if (line == kRefsColumns) return;
    auto f = io_detail::split_csv(line);
    if (f.size() != 4) throw Error(ErrorKind::ParseError, "expected 4 fields");
    out.push_back({io_detail::parse_u64(f[2]), io_detail::parse_rw(f[3]), io_detail::parse_u64(f[0]),
                   static_cast<ChannelId>(io_detail::parse_u64(f[1]))});
  });
  return out;
}

// ---- semantic events CSV -----------------------------------------------

inline constexpr const char* kEventsHeader = "# dimmtrace-events v1";
inline constexpr const char* kEventsColumns = "cycle,channel,kind,offset,user_id,rw";

inline EventKind parse_event_kind(const std::string& s) {
  for (auto k : {EventKind::BeginTracing, EventKind::EndTracing, EventKind::InsertMarker, EventKind::User,
                 EventKind::Unknown})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::ParseError, "unknown event kind '" + s + "'");
}

inline void write_events(std::ostream& os, std::span<const SemanticEvent> evs) {
  os << kEventsHeader << '\n' << kEventsColumns << '\n';
  for (const auto& e : evs)
    os << e.cycle << ',' << e.channel << ',' << to_string(e.kind) << ",0x" << std::hex << e.offset << std::dec << ','
       << e.user_id << ',' << io_detail::rw_str(e.rw) << '\n';
}

inline void write_events_file(const std::filesystem::path& path, std::span<const SemanticEvent> evs) {
  AtomicFileWriter w(path);
  write_events(w.stream(), evs);
  w.commit();
}

inline std::vector<SemanticEvent> read_events_file(const std::filesystem::path& path) {
  io_detail::expect_header(path, kEventsHeader);
  std::vector<SemanticEvent> out;
  io_detail::for_each_line(path, [&](const std::string& line, std::size_t) {
    if (line == kEventsColumns) return;
    auto f = io_detail::split_csv(line);
    if (f.size() != 6) throw Error(ErrorKind::ParseError, "expected 6 fields");
    SemanticEvent e;
    e.cycle = io_detail::parse_u64(f[0]);
    e.channel = static_cast<ChannelId>(io_detail::parse_u64(f[1]));
    e.kind = parse_event_kind(f[2]);
    e.offset = io_detail::parse_u64(f[3]);
    e.user_id = io_detail::parse_u64(f[4]);
    e.rw = io_detail::parse_rw(f[5]);
    out.push_back(e);
  });
  return out;
}

// ---- virtual and labeled reference CSVs --------------------------------

inline constexpr const char* kVirtualHeader = "# dimmtrace-virtual v1";
inline constexpr const char* kVirtualColumns = "cycle,pid,vaddr,rw";

inline void write_virtual(std::ostream& os, std::span<const VirtualRef> refs) {
  os << kVirtualHeader << '\n' << kVirtualColumns << '\n';
  for (const auto& r : refs)
    os << r.cycle << ',' << r.pid << ",0x" << std::hex << r.virt_addr << std::dec << ',' << io_detail::rw_str(r.rw) << '\n';
}

inline std::vector<VirtualRef> read_virtual_file(const std::filesystem::path& path) {
  io_detail::expect_header(path, kVirtualHeader);
  std::vector<VirtualRef> out;
  io_detail::for_each_line(path, [&](const std::string& line, std::size_t) {
    if (line == kVirtualColumns) return;
    auto f = io_detail::split_csv(line);
    if (f.size() != 4) throw Error(ErrorKind::ParseError, "expected 4 fields");
    out.push_back({io_detail::parse_i64(f[1]), io_detail::parse_u64(f[2]), io_detail::parse_rw(f[3]),
                   io_detail::parse_u64(f[0])});
  });
  return out;
}

inline constexpr const char* kLabeledHeader = "# dimmtrace-labeled v1";
inline constexpr const char* kLabeledColumns = "cycle,channel,addr,rw,label,in_window,dma_id";

inline void write_labeled(std::ostream& os, std::span<const LabeledRef> refs) {
  os << kLabeledHeader << '\n' << kLabeledColumns << '\n';
  for (const auto& l : refs) {
    os << l.ref.cycle << ',' << l.ref.channel << ",0x" << std::hex << l.ref.addr << std::dec << ','
       << io_detail::rw_str(l.ref.rw) << ',' << to_string(l.label) << ',' << (l.in_window ? 1 : 0) << ',';
    if (l.dma_id) os << *l.dma_id;
    os << '\n';
  }
}

}  // namespace dimmtrace
