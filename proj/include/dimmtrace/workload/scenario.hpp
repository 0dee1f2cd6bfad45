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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dimmtrace/dma.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/mapping_index.hpp"
#include "dimmtrace/semantic.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace::workload {

enum class PatternKind { Sequential, Random, MultiStream, Quicksort, Copy };

/// An access pattern in some address space (physical for raw actors,
/// virtual for processes).
struct Pattern {
  PatternKind kind = PatternKind::Sequential;
  std::uint64_t start = 0;
  std::uint64_t count = 0;   // references (sequential, random, multi_stream)
  std::uint64_t stride = 64; // bytes
  std::uint64_t range = 0;   // bytes (random)
  std::uint64_t streams = 1; // multi_stream
  std::uint64_t spacing = 0; // bytes between multi_stream bases
  std::uint64_t elements = 0;    // quicksort
  std::uint64_t elem_bytes = 8;  // quicksort
  std::uint64_t dst = 0;         // copy destination
  std::uint64_t bytes = 0;       // copy length
  std::uint64_t write_ppm = 0;   // share of writes for sequential/random/multi_stream
};

enum class ActorKind { Raw, Process, Dma };

enum class PageAssignment { Linear, Random };

struct ActorSpec {
  ActorKind kind = ActorKind::Raw;
  Pattern pattern;
  Pid pid = -1;
  PageAssignment pages = PageAssignment::Random;
  DmaRequest dma;  // kind == Dma; cycles are filled in by the generator
};

struct EventSpec {
  std::uint64_t at = 0;  // number of phase items emitted before this event
  std::uint64_t offset = 0;
  std::string name;
};

enum class QuantumMode { Fixed, Random };

struct PhaseSpec {
  std::uint64_t quantum = 1;
  QuantumMode quantum_mode = QuantumMode::Fixed;
  std::uint64_t idle_cycles = 0;
  std::vector<ActorSpec> actors;
  std::vector<EventSpec> events;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  MemConfig mem;
  unsigned channels = 1;
  std::string mapping;  // empty: row,bank,col[,channel:k]
  std::optional<PhysAddr> config_space_base;  // default: top of memory
  std::uint64_t config_space_size = 8u << 20;
  std::uint64_t page_size = 4096;
  std::uint64_t slot_cycles = 4;
  std::uint64_t jitter_cycles = 0;
  Cycle start_cycle = 16;
  bool tracing = true;
  PhysAddr page_pool_base = 0;
  std::uint64_t page_pool_pages = 0;
  std::vector<PhaseSpec> phases;
};

namespace detail {

inline std::uint64_t as_u64(const nlohmann::json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    try {
      std::size_t used = 0;
      auto v = std::stoull(s, &used, 0);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorKind::SpecError, where + ": expected a non-negative integer");
}

inline std::uint64_t get_u64(const nlohmann::json& obj, const char* key, std::uint64_t def, const std::string& where) {
  if (!obj.contains(key)) return def;
  return as_u64(obj.at(key), where + "." + key);
}

inline std::uint64_t require_u64(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(ErrorKind::SpecError, where + ": missing '" + key + "'");
  return as_u64(obj.at(key), where + "." + key);
}

inline std::string get_str(const nlohmann::json& obj, const char* key, const std::string& def) {
  if (!obj.contains(key)) return def;
  if (!obj.at(key).is_string()) throw Error(ErrorKind::SpecError, std::string(key) + ": expected a string");
  return obj.at(key).get<std::string>();
}

inline std::uint64_t write_ppm(const nlohmann::json& obj, const std::string& where) {
  if (!obj.contains("write_fraction")) {
    const auto rw = get_str(obj, "rw", "read");
    if (rw == "read") return 0;
    if (rw == "write") return 1'000'000;
    throw Error(ErrorKind::SpecError, where + ".rw: expected read or write");
  }
  const auto& f = obj.at("write_fraction");
  if (!f.is_number() || f.get<double>() < 0.0 || f.get<double>() > 1.0)
    throw Error(ErrorKind::SpecError, where + ".write_fraction: expected a number in [0, 1]");
  return static_cast<std::uint64_t>(f.get<double>() * 1e6 + 0.5);
}

inline Pattern parse_pattern(const nlohmann::json& j, const std::string& where) {
  Pattern p;
  const auto kind = get_str(j, "kind", get_str(j, "type", ""));
  if (kind == "sequential") {
    p.kind = PatternKind::Sequential;
    p.start = require_u64(j, "start", where);
    p.count = require_u64(j, "count", where);
    p.stride = get_u64(j, "stride", 64, where);
  } else if (kind == "random") {
    p.kind = PatternKind::Random;
    p.start = require_u64(j, "start", where);
    p.count = require_u64(j, "count", where);
    p.range = require_u64(j, "range", where);
    if (p.range == 0) throw Error(ErrorKind::SpecError, where + ".range must be > 0");
  } else if (kind == "multi_stream") {
    p.kind = PatternKind::MultiStream;
    p.start = require_u64(j, "start", where);
    p.count = require_u64(j, "count", where);
    p.streams = get_u64(j, "streams", 2, where);
    p.stride = get_u64(j, "stride", 64, where);
    p.spacing = get_u64(j, "spacing", 1u << 20, where);
    if (p.streams == 0) throw Error(ErrorKind::SpecError, where + ".streams must be > 0");
  } else if (kind == "quicksort") {
    p.kind = PatternKind::Quicksort;
    p.start = require_u64(j, "start", where);
    p.elements = require_u64(j, "elements", where);
    p.elem_bytes = get_u64(j, "elem_bytes", 8, where);
    if (p.elem_bytes == 0) throw Error(ErrorKind::SpecError, where + ".elem_bytes must be > 0");
  } else if (kind == "copy") {
    p.kind = PatternKind::Copy;
    p.start = require_u64(j, "src", where);
    p.dst = require_u64(j, "dst", where);
    p.bytes = require_u64(j, "bytes", where);
  } else {
    throw Error(ErrorKind::SpecError, where + ": unknown pattern kind '" + kind + "'");
  }
  p.write_ppm = write_ppm(j, where);
  return p;
}

inline ActorSpec parse_actor(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::SpecError, where + ": actor must be an object");
  ActorSpec a;
  const auto type = get_str(j, "type", "");
  if (type == "sequential" || type == "random" || type == "multi_stream" || type == "copy") {
    a.kind = ActorKind::Raw;
    auto pj = j;
    pj["kind"] = type;
    a.pattern = parse_pattern(pj, where);
  } else if (type == "process") {
    a.kind = ActorKind::Process;
    if (!j.contains("pid") || !j.at("pid").is_number_integer())
      throw Error(ErrorKind::SpecError, where + ": process needs an integer pid");
    a.pid = j.at("pid").get<Pid>();
    if (a.pid < 0) throw Error(ErrorKind::SpecError, where + ": pid must be >= 0");
    if (!j.contains("pattern")) throw Error(ErrorKind::SpecError, where + ": process needs a pattern");
    a.pattern = parse_pattern(j.at("pattern"), where + ".pattern");
    const auto pages = get_str(j, "pages", "random");
    if (pages == "linear") a.pages = PageAssignment::Linear;
    else if (pages == "random") a.pages = PageAssignment::Random;
    else throw Error(ErrorKind::SpecError, where + ".pages: expected linear or random");
  } else if (type == "dma") {
    a.kind = ActorKind::Dma;
    a.dma.id = require_u64(j, "id", where);
    try {
      a.dma.owner = parse_dma_owner(get_str(j, "owner", "disk"));
      a.dma.dir = parse_dma_dir(get_str(j, "dir", "read"));
    } catch (const Error& e) {
      throw Error(ErrorKind::SpecError, where + ": " + e.what());
    }
    a.dma.buf_start = require_u64(j, "buf", where);
    a.dma.buf_size = require_u64(j, "size", where);
    if (a.dma.buf_size == 0) throw Error(ErrorKind::SpecError, where + ".size must be > 0");
  } else {
    throw Error(ErrorKind::SpecError, where + ": unknown actor type '" + type + "'");
  }
  return a;
}

inline MemConfig parse_mem(const nlohmann::json& j, const std::string& where) {
  MemConfig m;
  m.freq_mhz = static_cast<std::uint32_t>(get_u64(j, "freq_mhz", m.freq_mhz, where));
  m.bus_width_bits = static_cast<std::uint16_t>(get_u64(j, "bus_width_bits", m.bus_width_bits, where));
  m.cacheline_bytes = static_cast<std::uint16_t>(get_u64(j, "cacheline_bytes", m.cacheline_bytes, where));
  m.burst_length = static_cast<std::uint8_t>(get_u64(j, "burst_length", m.burst_length, where));
  m.tccd = static_cast<std::uint8_t>(get_u64(j, "tccd", m.tccd, where));
  m.bank_count = static_cast<std::uint16_t>(get_u64(j, "bank_count", m.bank_count, where));
  m.row_bits = static_cast<std::uint8_t>(get_u64(j, "row_bits", m.row_bits, where));
  m.col_bits = static_cast<std::uint8_t>(get_u64(j, "col_bits", m.col_bits, where));
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::SpecError, where + ": " + e.what());
  }
  return m;
}

}  // namespace detail

inline nlohmann::json mem_config_to_json(const MemConfig& m) {
  return {{"freq_mhz", m.freq_mhz},       {"bus_width_bits", m.bus_width_bits}, {"cacheline_bytes", m.cacheline_bytes},
          {"burst_length", m.burst_length}, {"tccd", m.tccd},                   {"bank_count", m.bank_count},
          {"row_bits", m.row_bits},       {"col_bits", m.col_bits}};
}

/// Parses a scenario description. Errors name the offending location,
/// e.g. "phases[1].actors[0].pattern: missing 'count'".
inline ScenarioSpec parse_scenario(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw Error(ErrorKind::SpecError, "scenario must be a JSON object");
  ScenarioSpec s;
  s.name = get_str(j, "name", s.name);
  s.seed = get_u64(j, "seed", s.seed, "seed");
  if (j.contains("mem")) s.mem = parse_mem(j.at("mem"), "mem");
  s.channels = static_cast<unsigned>(get_u64(j, "channels", 1, "channels"));
  if (s.channels == 0 || (s.channels & (s.channels - 1)) != 0)
    throw Error(ErrorKind::SpecError, "channels: must be a power of two");
  s.mapping = get_str(j, "mapping", "");
  if (j.contains("config_space")) {
    const auto& cs = j.at("config_space");
    if (cs.contains("base")) s.config_space_base = as_u64(cs.at("base"), "config_space.base");
    s.config_space_size = get_u64(cs, "size", s.config_space_size, "config_space");
  }
  s.page_size = get_u64(j, "page_size", s.page_size, "page_size");
  if (s.page_size == 0 || (s.page_size & (s.page_size - 1)) != 0)
    throw Error(ErrorKind::SpecError, "page_size: must be a power of two");
  s.slot_cycles = get_u64(j, "slot_cycles", s.slot_cycles, "slot_cycles");
  if (s.slot_cycles < 3) throw Error(ErrorKind::SpecError, "slot_cycles: must be >= 3");
  s.jitter_cycles = get_u64(j, "jitter_cycles", 0, "jitter_cycles");
  s.start_cycle = get_u64(j, "start_cycle", s.start_cycle, "start_cycle");
  if (j.contains("tracing")) s.tracing = j.at("tracing").get<bool>();
  if (j.contains("page_pool")) {
    s.page_pool_base = require_u64(j.at("page_pool"), "base", "page_pool");
    s.page_pool_pages = require_u64(j.at("page_pool"), "pages", "page_pool");
  }
  if (!j.contains("phases") || !j.at("phases").is_array()) throw Error(ErrorKind::SpecError, "phases: missing array");
  for (std::size_t pi = 0; pi < j.at("phases").size(); ++pi) {
    const auto& pj = j.at("phases")[pi];
    const std::string where = "phases[" + std::to_string(pi) + "]";
    PhaseSpec ph;
    ph.quantum = get_u64(pj, "quantum", 1, where);
    if (ph.quantum == 0) throw Error(ErrorKind::SpecError, where + ".quantum: must be >= 1");
    const auto mode = get_str(pj, "quantum_mode", "fixed");
    if (mode == "fixed") ph.quantum_mode = QuantumMode::Fixed;
    else if (mode == "random") ph.quantum_mode = QuantumMode::Random;
    else throw Error(ErrorKind::SpecError, where + ".quantum_mode: expected fixed or random");
    ph.idle_cycles = get_u64(pj, "idle_cycles", 0, where);
    if (pj.contains("actors")) {
      for (std::size_t ai = 0; ai < pj.at("actors").size(); ++ai)
        ph.actors.push_back(parse_actor(pj.at("actors")[ai], where + ".actors[" + std::to_string(ai) + "]"));
    }
    if (pj.contains("events")) {
      for (std::size_t ei = 0; ei < pj.at("events").size(); ++ei) {
        const auto& ej = pj.at("events")[ei];
        const std::string ew = where + ".events[" + std::to_string(ei) + "]";
        EventSpec ev;
        ev.at = get_u64(ej, "at", 0, ew);
        const auto kind = get_str(ej, "kind", "");
        if (!kind.empty()) {
          auto k = inner_command_from_name(kind);
          if (!k) throw Error(ErrorKind::SpecError, ew + ".kind: not an inner command");
          ev.offset = *k == EventKind::BeginTracing ? EventDictionary::kBeginOffset
                      : *k == EventKind::EndTracing ? EventDictionary::kEndOffset
                                                    : EventDictionary::kMarkerOffset;
          ev.name = kind;
        } else if (ej.contains("user")) {
          ev.offset = kUserRegionOffset + as_u64(ej.at("user"), ew + ".user") * s.mem.cacheline_bytes;
          ev.name = get_str(ej, "name", "USER_" + std::to_string(as_u64(ej.at("user"), ew + ".user")));
        } else {
          throw Error(ErrorKind::SpecError, ew + ": needs 'kind' or 'user'");
        }
        ph.events.push_back(ev);
      }
    }
    s.phases.push_back(std::move(ph));
  }
  return s;
}

}  // namespace dimmtrace::workload
