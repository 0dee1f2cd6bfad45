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
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dimmtrace/address_mapping.hpp"
#include "dimmtrace/analysis/reuse.hpp"
#include "dimmtrace/analysis/run_length.hpp"
#include "dimmtrace/analysis/streams.hpp"
#include "dimmtrace/binary_io.hpp"
#include "dimmtrace/command_file.hpp"
#include "dimmtrace/ddr_decoder.hpp"
#include "dimmtrace/dma.hpp"
#include "dimmtrace/journal_io.hpp"
#include "dimmtrace/ledger_io.hpp"
#include "dimmtrace/mapping_index.hpp"
#include "dimmtrace/merge.hpp"
#include "dimmtrace/semantic.hpp"
#include "dimmtrace/trace_codec.hpp"
#include "dimmtrace/workload/generator.hpp"
#include "dimmtrace/workload/scenario.hpp"

namespace dimmtrace {

/// Platform facts a replay needs besides the traces themselves.
struct Platform {
  MemConfig mem;
  unsigned channels = 1;
  std::string mapping = "row,bank,col";
  ConfigSpace config_space;
  std::uint64_t page_size = 4096;

  AddressMapping address_mapping() const { return AddressMapping::parse(mem, mapping); }
  bool operator==(const Platform&) const = default;
};

inline nlohmann::json platform_to_json(const Platform& p) {
  return {{"schema_version", 1},
          {"mem", workload::mem_config_to_json(p.mem)},
          {"channels", p.channels},
          {"mapping", p.mapping},
          {"config_space", {{"base", p.config_space.base}, {"size", p.config_space.size}, {"stride", p.config_space.stride}}},
          {"page_size", p.page_size}};
}

inline Platform platform_from_json(const nlohmann::json& j) {
  try {
    Platform p;
    p.mem = workload::detail::parse_mem(j.at("mem"), "mem");
    p.channels = j.at("channels").get<unsigned>();
    p.mapping = j.at("mapping").get<std::string>();
    const auto& cs = j.at("config_space");
    p.config_space = {cs.at("base").get<std::uint64_t>(), cs.at("size").get<std::uint64_t>(),
                      cs.at("stride").get<std::uint64_t>()};
    p.page_size = j.at("page_size").get<std::uint64_t>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("platform: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

/// File names inside a generated scenario directory.
namespace layout {
inline const char* const kPlatform = "platform.json";
inline const char* const kDictionary = "dictionary.json";
inline const char* const kPages = "pages.jsonl";
inline const char* const kDma = "dma.jsonl";
inline const char* const kLedger = "ledger.json";
inline std::string commands(unsigned ch) { return "ch" + std::to_string(ch) + ".hmtc"; }
inline std::string trace(unsigned ch) { return "ch" + std::to_string(ch) + ".hmtt"; }
inline const char* const kMerged = "merged.hmtt";
inline const char* const kNormal = "normal.refs";
inline const char* const kEvents = "events.csv";
inline const char* const kVirtual = "virtual.csv";
inline const char* const kLabeled = "labeled.csv";
inline const char* const kSummary = "summary.json";
}  // namespace layout

inline Platform platform_of(const workload::Ledger& L) {
  return Platform{L.mem, L.channels, L.mapping, L.config_space, L.page_size};
}

/// Writes command files, journals, dictionary, platform and ledger.
inline void write_generated(const std::filesystem::path& dir, const workload::GeneratedScenario& g) {
  std::filesystem::create_directories(dir);
  const auto& L = g.ledger;
  for (unsigned ch = 0; ch < g.commands.size(); ++ch)
    write_file_atomic(dir / layout::commands(ch), encode_command_file(L.mem, g.commands[ch]));
  write_text_atomic(dir / layout::kPlatform, platform_to_json(platform_of(L)).dump(2) + "\n");
  write_text_atomic(dir / layout::kDictionary, L.dictionary.to_json().dump(2) + "\n");
  write_page_journal(dir / layout::kPages, PageJournal{L.page_journal, {}});
  write_dma_journal(dir / layout::kDma, L.dma_journal);
  workload::write_ledger(dir / layout::kLedger, L);
}

struct PipelineResult {
  Platform platform;
  std::vector<DecodeStats> decode;  // per channel
  std::vector<PhysRef> merged;
  OverlayResult overlay;
  WindowResult windows;
  bool whole_trace_window = false;
  std::vector<std::optional<VirtualRef>> virtual_refs;  // aligned with overlay.normal
  TranslationStats translation;
  DmaClassification dma;
  analysis::RunLengthStats run_lengths;
  std::map<Pid, analysis::StreamStats> streams;
  analysis::ReuseHistogram reuse;

  std::uint64_t decode_warnings() const {
    std::uint64_t n = 0;
    for (const auto& d : decode) n += d.warnings.total();
    return n;
  }
};

inline nlohmann::json summary_to_json(const PipelineResult& r) {
  using nlohmann::json;
  json decode = json::array();
  for (const auto& d : r.decode)
    decode.push_back({{"activates", d.activates}, {"reads", d.reads}, {"writes", d.writes}, {"precharges", d.precharges},
                      {"refs", d.refs}, {"warnings", d.warnings.total()}});
  json labels = json::object();
  for (auto l : {RefLabel::CpuRead, RefLabel::CpuWrite, RefLabel::DmaRead, RefLabel::DmaWrite})
    labels[to_string(l)] = {{"count", r.dma.summary.count(l)}, {"percent", r.dma.summary.percent(l)}};
  json streams = json::object();
  for (const auto& [pid, st] : r.streams)
    streams[std::to_string(pid)] = {{"accesses", st.total_accesses}, {"stream_accesses", st.stream_accesses}, {"scr", st.scr}};
  json runs = json::array();
  for (const auto& [len, n] : r.run_lengths.histogram) runs.push_back(json::array({len, n}));
  return {{"schema_version", 1},
          {"decode", decode},
          {"merged_refs", r.merged.size()},
          {"normal_refs", r.overlay.normal.size()},
          {"events", r.overlay.events.size()},
          {"windows", r.windows.windows.size()},
          {"translation", {{"total", r.translation.total}, {"misses", r.translation.misses}, {"miss_rate", r.translation.miss_rate()}}},
          {"labels", labels},
          {"in_window", r.dma.summary.in_window},
          {"run_lengths", runs},
          {"scr", streams},
          {"reuse", {{"cold", r.reuse.cold}, {"overflow", r.reuse.overflow}}}};
}

/// Replays a generated scenario directory through every stage. Traces are
/// streamed to disk per channel and merged from the files; later stages run
/// in memory. Every intermediate file lands in `out_dir`.
inline PipelineResult run_pipeline(const std::filesystem::path& scenario_dir,
                                   const std::filesystem::path& out_dir) {
  PipelineResult res;
  res.platform = platform_from_json(read_json_file(scenario_dir / layout::kPlatform));
  const auto& P = res.platform;
  const auto mapping = P.address_mapping();
  const auto dict = EventDictionary::from_json(read_json_file(scenario_dir / layout::kDictionary));
  const auto pages = read_page_journal(scenario_dir / layout::kPages);
  const auto dma_journal = read_dma_journal(scenario_dir / layout::kDma);

  std::filesystem::create_directories(out_dir);

  // Decode each channel's commands straight into a packed trace file.
  for (unsigned ch = 0; ch < P.channels; ++ch) {
    CommandFileReader cmds(scenario_dir / layout::commands(ch));
    TraceFileHeader h;
    h.channel_id = static_cast<ChannelId>(ch);
    h.config = cmds.config();
    h.config_space_base = P.config_space.base;
    h.config_space_size = P.config_space.size;
    TraceFileWriter w(out_dir / layout::trace(ch), h);
    CommandDecoder dec(mapping, cmds.config(), static_cast<ChannelId>(ch));
    while (auto c = cmds.next())
      if (auto r = dec.feed(*c)) w.add(*r);
    w.commit();
    res.decode.push_back(dec.stats());
  }

  // Merge channel files into one mixed trace.
  {
    using Source = std::function<std::optional<PhysRef>()>;
    std::vector<Source> sources;
    for (unsigned ch = 0; ch < P.channels; ++ch) {
      auto rd = std::make_shared<TraceFileReader>(out_dir / layout::trace(ch));
      sources.emplace_back([rd] { return rd->next(); });
    }
    KWayMerger<Source> merger(std::move(sources));
    TraceFileHeader h;
    h.channel_id = kMergedChannel;
    h.config = P.mem;
    h.config_space_base = P.config_space.base;
    h.config_space_size = P.config_space.size;
    TraceFileWriter w(out_dir / layout::kMerged, h);
    while (auto r = merger.next()) {
      w.add(*r);
      res.merged.push_back(*r);
    }
    w.commit();
  }

  res.overlay = overlay(res.merged, P.config_space, dict);
  res.windows = session_windows(res.overlay.events);
  const bool has_tracing = std::any_of(res.overlay.events.begin(), res.overlay.events.end(), [](const SemanticEvent& e) {
    return e.kind == EventKind::BeginTracing || e.kind == EventKind::EndTracing;
  });
  res.whole_trace_window = !has_tracing;
  const WindowSet windows = has_tracing ? WindowSet(res.windows.windows) : WindowSet::everything();

  const auto index = build_mapping_index(pages.maps, pages.unmaps);
  res.virtual_refs.reserve(res.overlay.normal.size());
  std::vector<VirtualRef> translated;
  for (const auto& r : res.overlay.normal) {
    auto v = translate_one(r, index, P.page_size);
    ++res.translation.total;
    if (v) {
      ++res.translation.translated;
      translated.push_back(*v);
    } else {
      ++res.translation.misses;
    }
    res.virtual_refs.push_back(v);
  }

  res.dma = classify_dma(res.overlay.normal, dma_journal, res.overlay.events, DmaTagMap::from_dictionary(dict, P.config_space),
                         windows, P.mem.cacheline_bytes);

  std::vector<Pid> pids;
  std::vector<analysis::PidLine> lines;
  pids.reserve(translated.size());
  lines.reserve(translated.size());
  for (const auto& v : translated) {
    pids.push_back(v.pid);
    lines.push_back({v.pid, static_cast<std::int64_t>(v.virt_addr / P.mem.cacheline_bytes)});
  }
  res.run_lengths = analysis::run_lengths(pids);
  res.streams = analysis::scr_by_pid(lines);
  std::vector<std::uint64_t> addrs;
  addrs.reserve(res.overlay.normal.size());
  for (const auto& r : res.overlay.normal) addrs.push_back(r.addr);
  res.reuse = analysis::reuse_distance(addrs, P.page_size);

  // Text outputs.
  write_refs_file(out_dir / layout::kNormal, res.overlay.normal);
  write_events_file(out_dir / layout::kEvents, res.overlay.events);
  {
    AtomicFileWriter w(out_dir / layout::kVirtual);
    write_virtual(w.stream(), translated);
    w.commit();
  }
  {
    AtomicFileWriter w(out_dir / layout::kLabeled);
    write_labeled(w.stream(), res.dma.refs);
    w.commit();
  }
  write_text_atomic(out_dir / layout::kSummary, summary_to_json(res).dump(2) + "\n");
  return res;
}

}  // namespace dimmtrace
