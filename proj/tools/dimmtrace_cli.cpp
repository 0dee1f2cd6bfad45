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

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "dimmtrace/dimmtrace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dimmtrace;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kConformance = 3 };

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return os.str();
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Reproducibility record written beside each run's outputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command) : command_(std::move(command)) {}

  void input(const fs::path& p) {
    if (fs::is_regular_file(p)) inputs_.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    else inputs_.push_back({{"path", p.string()}});
  }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  json& params() { return params_; }

  void write(const fs::path& path) const {
    json j = {{"schema_version", 1}, {"tool", "dimmtrace"},  {"version", kVersion}, {"command", command_},
              {"inputs", inputs_},   {"outputs", outputs_},  {"params", params_},   {"timestamp", utc_now()}};
    write_text_atomic(path, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  json inputs_ = json::array();
  json outputs_ = json::array();
  json params_ = json::object();
};

fs::path manifest_beside(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

Platform load_platform(const std::string& path) {
  return path.empty() ? Platform{} : platform_from_json(read_json_file(path));
}

std::string header_line(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + p.string());
  std::string first;
  std::getline(in, first);
  return first;
}

// Analyzer input: physical .refs or virtual CSV.
struct AnalyzeInput {
  bool is_virtual = false;
  std::vector<PhysRef> phys;
  std::vector<VirtualRef> virt;

  std::vector<Pid> pids() const {
    std::vector<Pid> out;
    if (is_virtual) for (const auto& v : virt) out.push_back(v.pid);
    else out.assign(phys.size(), 0);
    return out;
  }
  std::vector<std::uint64_t> addrs() const {
    std::vector<std::uint64_t> out;
    if (is_virtual) for (const auto& v : virt) out.push_back(v.virt_addr);
    else for (const auto& r : phys) out.push_back(r.addr);
    return out;
  }
  std::vector<analysis::PidLine> lines(std::uint64_t line_bytes) const {
    std::vector<analysis::PidLine> out;
    const auto p = pids();
    const auto a = addrs();
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back({p[i], static_cast<std::int64_t>(a[i] / line_bytes)});
    return out;
  }
};

AnalyzeInput load_analyze_input(const fs::path& p) {
  AnalyzeInput in;
  const auto h = header_line(p);
  if (h == kVirtualHeader) {
    in.is_virtual = true;
    in.virt = read_virtual_file(p);
  } else if (h == kRefsHeader) {
    in.phys = read_refs_file(p);
  } else {
    throw Error(ErrorKind::ParseError, p.string() + ": not a refs or virtual trace file");
  }
  return in;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

// Writes PREFIX.csv and PREFIX.json plus a manifest.
void write_analysis(const fs::path& prefix, const std::string& kind, const std::string& columns, const std::string& rows,
                    json summary, RunManifest& m) {
  const fs::path csv = prefix.string() + ".csv";
  const fs::path js = prefix.string() + ".json";
  write_text_atomic(csv, "# dimmtrace-" + kind + " v1\n" + columns + "\n" + rows);
  summary["schema_version"] = 1;
  summary["kind"] = kind;
  write_text_atomic(js, summary.dump(2) + "\n");
  m.output(csv);
  m.output(js);
  m.write(manifest_beside(js));
}

std::string gbps(double bits_per_s) {
  std::ostringstream os;
  os << std::setprecision(10) << bits_per_s / 1e9 << " Gb/s";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dimmtrace: DDR command replay, packed traces and memory-trace analytics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // gen
  auto* gen = app.add_subcommand("gen", "synthesize command streams, journals and ledger from a scenario");
  std::string gen_spec, gen_out;
  gen->add_option("spec", gen_spec, "scenario JSON")->required();
  gen->add_option("--out", gen_out, "output directory")->required();

  // decode
  auto* dec = app.add_subcommand("decode", "decode a .hmtc command file into physical references");
  std::string dec_in, dec_out, dec_mapping;
  unsigned dec_channel = 0;
  dec->add_option("input", dec_in, ".hmtc file")->required();
  dec->add_option("--mapping", dec_mapping, "address mapping, e.g. row,bank,col,channel:1");
  dec->add_option("--channel", dec_channel, "channel id stamped on references");
  dec->add_option("--out", dec_out, ".refs output")->required();

  // encode
  auto* enc = app.add_subcommand("encode", "pack a .refs file into a .hmtt trace");
  std::string enc_in, enc_out, enc_platform;
  unsigned enc_channel = 0;
  bool enc_merged = false;
  Cycle enc_epoch = 0;
  enc->add_option("input", enc_in, ".refs file")->required();
  enc->add_option("--platform", enc_platform, "platform.json (memory config and config space)");
  enc->add_option("--channel", enc_channel, "channel id in the header");
  enc->add_flag("--merged", enc_merged, "write a merged multi-channel trace");
  enc->add_option("--epoch", enc_epoch, "cycle the first duration counts from");
  enc->add_option("--out", enc_out, ".hmtt output")->required();

  // decode-trace
  auto* dtr = app.add_subcommand("decode-trace", "unpack a .hmtt trace into a .refs file");
  std::string dtr_in, dtr_out;
  dtr->add_option("input", dtr_in, ".hmtt file")->required();
  dtr->add_option("--out", dtr_out, ".refs output")->required();

  // merge
  auto* mrg = app.add_subcommand("merge", "merge per-channel .hmtt traces by cycle");
  std::vector<std::string> mrg_in;
  std::string mrg_out;
  mrg->add_option("inputs", mrg_in, ".hmtt files")->required();
  mrg->add_option("--out", mrg_out, "merged .hmtt")->required();

  // overlay
  auto* ovl = app.add_subcommand("overlay", "split a trace into normal references and semantic events");
  std::string ovl_in, ovl_dict, ovl_normal, ovl_events;
  ovl->add_option("input", ovl_in, ".hmtt trace")->required();
  ovl->add_option("--dict", ovl_dict, "event dictionary JSON (default: canonical)");
  ovl->add_option("--out-normal", ovl_normal, ".refs output")->required();
  ovl->add_option("--out-events", ovl_events, "events CSV output")->required();

  // translate
  auto* trn = app.add_subcommand("translate", "rebuild per-process virtual references");
  std::string trn_in, trn_journal, trn_out, trn_report;
  std::uint64_t trn_page = 4096;
  trn->add_option("input", trn_in, ".refs file")->required();
  trn->add_option("--journal", trn_journal, "page-mapping JSONL")->required();
  trn->add_option("--page-size", trn_page, "page size in bytes");
  trn->add_option("--out", trn_out, "virtual CSV output")->required();
  trn->add_option("--report", trn_report, "miss report JSON");

  // classify-dma
  auto* cls = app.add_subcommand("classify-dma", "label references as CPU or DMA traffic");
  std::string cls_in, cls_journal, cls_events, cls_dict, cls_out, cls_summary;
  std::uint64_t cls_line = 64;
  cls->add_option("input", cls_in, ".refs file")->required();
  cls->add_option("--journal", cls_journal, "DMA JSONL")->required();
  cls->add_option("--events", cls_events, "events CSV")->required();
  cls->add_option("--dict", cls_dict, "event dictionary JSON")->required();
  cls->add_option("--line", cls_line, "cacheline bytes (config-space slot stride)");
  cls->add_option("--out", cls_out, "labeled CSV output")->required();
  cls->add_option("--summary", cls_summary, "summary JSON output");

  // analyze
  auto* ana = app.add_subcommand("analyze", "run an analyzer; writes PREFIX.csv and PREFIX.json");
  std::string ana_kind, ana_in, ana_out, ana_platform;
  std::size_t window = analysis::kDefaultStreamWindow, min_len = analysis::kDefaultMinStreamLength, depth = analysis::kReuseStackDepth, top = 10;
  unsigned trigger = 3, bitwidth = 40;
  std::uint64_t line = 64, granularity = 4096, interval = 1'000'000, fifo_depth = 16 * 1024;
  std::uint64_t link_bps = 1'000'000'000;
  unsigned record_bits = 32;
  MemConfig bw;
  unsigned bw_bus = bw.bus_width_bits, bw_line = bw.cacheline_bytes, bw_bl = bw.burst_length, bw_tccd = bw.tccd;
  ana->add_option("kind", ana_kind, "scr|prefetch|runlen|reuse|hot|intervals|stride-cdf|bwmodel|fifo")
      ->required()
      ->check(CLI::IsMember({"scr", "prefetch", "runlen", "reuse", "hot", "intervals", "stride-cdf", "bwmodel", "fifo"}));
  ana->add_option("input", ana_in, ".refs or virtual CSV");
  ana->add_option("--out", ana_out, "output prefix");
  ana->add_option("--platform", ana_platform, "platform.json (intervals, fifo)");
  ana->add_option("--window", window, "stream scan window");
  ana->add_option("--min-len", min_len, "minimum stream length");
  ana->add_option("--trigger", trigger, "prefetcher trigger run");
  ana->add_option("--line", line, "cacheline bytes");
  ana->add_option("--granularity", granularity, "reuse block bytes; hot page bytes");
  ana->add_option("--depth", depth, "reuse stack depth");
  ana->add_option("--top", top, "hot pages to report");
  ana->add_option("--interval-cycles", interval, "interval length in cycles");
  ana->add_option("--fifo-depth", fifo_depth, "FIFO entries");
  ana->add_option("--link-bps", link_bps, "link bits per second");
  ana->add_option("--record-bits", record_bits, "bits per trace record");
  ana->add_option("--freq", bw.freq_mhz, "memory clock in MHz");
  ana->add_option("--bus", bw_bus, "data bus width in bits");
  ana->add_option("--line-bytes,--cacheline", bw_line, "cacheline bytes for the bandwidth model");
  ana->add_option("--bl", bw_bl, "burst length");
  ana->add_option("--tccd", bw_tccd, "tCCD in cycles");
  ana->add_option("--bitwidth", bitwidth, "trace record bits");

  // verify
  auto* ver = app.add_subcommand("verify", "generate a scenario, replay it and check every stage against its ledger");
  std::string ver_dir, ver_out;
  ver->add_option("scenario_dir", ver_dir, "directory holding scenario.json")->required();
  ver->add_option("--out", ver_out, "output directory (default: <scenario_dir>/out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  // bwmodel's --line means the cacheline of the model; reuse the generic flag when given.
  if (ana->count("--line") && !ana->count("--line-bytes")) bw_line = static_cast<unsigned>(line);

  try {
    if (*gen) {
      RunManifest m("gen");
      m.input(gen_spec);
      const auto spec = workload::parse_scenario(read_json_file(gen_spec));
      const auto g = workload::generate(spec);
      write_generated(gen_out, g);
      for (const auto& e : fs::directory_iterator(gen_out))
        if (e.path().filename() != "manifest.json") m.output(e.path());
      m.params()["seed"] = spec.seed;
      m.write(fs::path(gen_out) / "manifest.json");
      std::cout << "generated " << g.ledger.refs.size() << " references, " << g.ledger.events.size() << " events into "
                << gen_out << "\n";
      return kOk;
    }

    if (*dec) {
      RunManifest m("decode");
      m.input(dec_in);
      CommandFileReader cmds(dec_in);
      const auto mapping = dec_mapping.empty() ? AddressMapping::canonical(cmds.config())
                                               : AddressMapping::parse(cmds.config(), dec_mapping);
      CommandDecoder d(mapping, cmds.config(), static_cast<ChannelId>(dec_channel));
      AtomicFileWriter w(dec_out);
      w.stream() << kRefsHeader << '\n' << kRefsColumns << '\n';
      std::vector<PhysRef> one(1);
      while (auto c = cmds.next())
        if (auto r = d.feed(*c)) {
          w.stream() << r->cycle << ',' << r->channel << ",0x" << std::hex << r->addr << std::dec << ','
                     << (r->rw == Rw::Read ? 'R' : 'W') << '\n';
        }
      w.commit();
      m.output(dec_out);
      m.params() = {{"mapping", mapping.to_string()}, {"channel", dec_channel}};
      m.write(manifest_beside(dec_out));
      const auto& st = d.stats();
      std::cout << "decoded " << st.refs << " references";
      if (st.warnings.total()) {
        std::cout << ", warnings:";
        st.warnings.for_each_nonzero([](Warning w, std::uint64_t n) { std::cout << ' ' << to_string(w) << '=' << n; });
      }
      std::cout << "\n";
      return kOk;
    }

    if (*enc) {
      RunManifest m("encode");
      m.input(enc_in);
      if (!enc_platform.empty()) m.input(enc_platform);
      const auto P = load_platform(enc_platform);
      TraceFileHeader h;
      h.channel_id = enc_merged ? kMergedChannel : static_cast<ChannelId>(enc_channel);
      h.config = P.mem;
      h.epoch = enc_epoch;
      h.config_space_base = P.config_space.base;
      h.config_space_size = P.config_space.size;
      const auto refs = read_refs_file(enc_in);
      TraceFileWriter w(enc_out, h);
      for (const auto& r : refs) w.add(r);
      w.commit();
      m.output(enc_out);
      m.params() = {{"channel", h.channel_id}, {"epoch", enc_epoch}};
      m.write(manifest_beside(enc_out));
      std::cout << "encoded " << refs.size() << " references\n";
      return kOk;
    }

    if (*dtr) {
      RunManifest m("decode-trace");
      m.input(dtr_in);
      TraceFileReader rd(dtr_in);
      AtomicFileWriter w(dtr_out);
      w.stream() << kRefsHeader << '\n' << kRefsColumns << '\n';
      std::uint64_t n = 0;
      while (auto r = rd.next()) {
        w.stream() << r->cycle << ',' << r->channel << ",0x" << std::hex << r->addr << std::dec << ','
                   << (r->rw == Rw::Read ? 'R' : 'W') << '\n';
        ++n;
      }
      w.commit();
      m.output(dtr_out);
      m.write(manifest_beside(dtr_out));
      std::cout << "decoded " << n << " references\n";
      return kOk;
    }

    if (*mrg) {
      RunManifest m("merge");
      using Source = std::function<std::optional<PhysRef>()>;
      std::vector<Source> sources;
      std::optional<TraceFileHeader> first;
      for (const auto& p : mrg_in) {
        m.input(p);
        auto rd = std::make_shared<TraceFileReader>(p);
        if (!first) first = rd->header();
        sources.emplace_back([rd] { return rd->next(); });
      }
      TraceFileHeader h = *first;
      h.channel_id = kMergedChannel;
      h.epoch = 0;
      KWayMerger<Source> merger(std::move(sources));
      TraceFileWriter w(mrg_out, h);
      std::uint64_t n = 0;
      while (auto r = merger.next()) {
        w.add(*r);
        ++n;
      }
      w.commit();
      m.output(mrg_out);
      m.write(manifest_beside(mrg_out));
      std::cout << "merged " << n << " references from " << mrg_in.size() << " inputs\n";
      return kOk;
    }

    if (*ovl) {
      RunManifest m("overlay");
      m.input(ovl_in);
      if (!ovl_dict.empty()) m.input(ovl_dict);
      TraceFileReader rd(ovl_in);
      const auto& h = rd.header();
      const ConfigSpace cs{h.config_space_base, h.config_space_size, h.config.cacheline_bytes};
      const auto dict = ovl_dict.empty() ? EventDictionary::canonical() : EventDictionary::from_json(read_json_file(ovl_dict));
      std::vector<PhysRef> trace;
      while (auto r = rd.next()) trace.push_back(*r);
      const auto res = overlay(trace, cs, dict);
      write_refs_file(ovl_normal, res.normal);
      write_events_file(ovl_events, res.events);
      m.output(ovl_normal);
      m.output(ovl_events);
      m.write(manifest_beside(ovl_normal));
      std::cout << res.normal.size() << " normal references, " << res.events.size() << " events\n";
      return kOk;
    }

    if (*trn) {
      RunManifest m("translate");
      m.input(trn_in);
      m.input(trn_journal);
      const auto refs = read_refs_file(trn_in);
      const auto journal = read_page_journal(trn_journal);
      const auto index = build_mapping_index(journal.maps, journal.unmaps);
      const auto [virt, st] = translate(refs, index, trn_page);
      {
        AtomicFileWriter w(trn_out);
        write_virtual(w.stream(), virt);
        w.commit();
      }
      m.output(trn_out);
      if (!trn_report.empty()) {
        json rep = {{"schema_version", 1},
                    {"total", st.total},
                    {"translated", st.translated},
                    {"misses", st.misses},
                    {"miss_rate", st.miss_rate()}};
        write_text_atomic(trn_report, rep.dump(2) + "\n");
        m.output(trn_report);
      }
      m.params() = {{"page_size", trn_page}};
      m.write(manifest_beside(trn_out));
      std::cout << "translated " << st.translated << " of " << st.total << " references, miss rate "
                << fmt_double(100.0 * st.miss_rate()) << "%\n";
      return kOk;
    }

    if (*cls) {
      RunManifest m("classify-dma");
      for (const auto& p : {cls_in, cls_journal, cls_events, cls_dict}) m.input(p);
      const auto refs = read_refs_file(cls_in);
      const auto reqs = read_dma_journal(cls_journal);
      const auto events = read_events_file(cls_events);
      const auto dict = EventDictionary::from_json(read_json_file(cls_dict));
      const ConfigSpace cs{0, 0, cls_line};
      const auto wr = session_windows(events);
      const bool has_tracing = std::any_of(events.begin(), events.end(), [](const SemanticEvent& e) {
        return e.kind == EventKind::BeginTracing || e.kind == EventKind::EndTracing;
      });
      const auto res = classify_dma(refs, reqs, events, DmaTagMap::from_dictionary(dict, cs),
                                    has_tracing ? WindowSet(wr.windows) : WindowSet::everything(), cls_line);
      {
        AtomicFileWriter w(cls_out);
        write_labeled(w.stream(), res.refs);
        w.commit();
      }
      m.output(cls_out);
      const auto& s = res.summary;
      if (!cls_summary.empty()) {
        json labels = json::object();
        for (auto l : {RefLabel::CpuRead, RefLabel::CpuWrite, RefLabel::DmaRead, RefLabel::DmaWrite})
          labels[to_string(l)] = {{"count", s.count(l)}, {"percent", s.percent(l)}};
        json sizes = json::array();
        for (const auto& p : s.request_size_cdf) sizes.push_back({{"bytes", p.x}, {"cumulative", p.cumulative}});
        json means = json::array();
        for (const auto& [k, v] : s.mean_request_size)
          means.push_back({{"owner", to_string(k.first)}, {"dir", to_string(k.second)}, {"mean_bytes", v}});
        json reqs_j = json::array();
        for (const auto& r : s.requests)
          reqs_j.push_back({{"id", r.id}, {"active_begin", r.active_begin}, {"active_end", r.active_end},
                            {"transferred_bytes", r.transferred_bytes}});
        json warn = json::object();
        res.diagnostics.for_each_nonzero([&](Warning w, std::uint64_t n) { warn[std::string(to_string(w))] = n; });
        json j = {{"schema_version", 1}, {"in_window", s.in_window}, {"out_of_window", s.out_of_window},
                  {"labels", labels},    {"request_size_cdf", sizes}, {"mean_request_size", means},
                  {"requests", reqs_j},  {"warnings", warn}};
        write_text_atomic(cls_summary, j.dump(2) + "\n");
        m.output(cls_summary);
      }
      m.params() = {{"line", cls_line}};
      m.write(manifest_beside(cls_out));
      for (auto l : {RefLabel::CpuRead, RefLabel::CpuWrite, RefLabel::DmaRead, RefLabel::DmaWrite})
        std::cout << to_string(l) << ' ' << fmt_double(s.percent(l)) << "%\n";
      return kOk;
    }

    if (*ana) {
      RunManifest m("analyze " + ana_kind);
      if (ana_kind == "bwmodel") {
        MemConfig c = bw;
        c.bus_width_bits = static_cast<std::uint16_t>(bw_bus);
        c.cacheline_bytes = static_cast<std::uint16_t>(bw_line);
        c.burst_length = static_cast<std::uint8_t>(bw_bl);
        c.tccd = static_cast<std::uint8_t>(bw_tccd);
        const double peak = peak_trace_bandwidth(c, bitwidth);
        const double cmd = command_frequency(c);
        std::cout << "peak trace bandwidth: " << gbps(peak) << "\n"
                  << "column command frequency: " << fmt_double(cmd / 1e6) << " MHz\n";
        if (!ana_out.empty()) {
          m.params() = {{"freq_mhz", c.freq_mhz}, {"bus_bits", bw_bus}, {"line_bytes", bw_line},
                        {"burst_length", bw_bl},  {"tccd", bw_tccd},   {"bitwidth", bitwidth}};
          write_analysis(ana_out, "bwmodel", "peak_bits_per_s,command_hz",
                         fmt_double(peak) + "," + fmt_double(cmd) + "\n",
                         {{"peak_bits_per_s", peak}, {"command_hz", cmd}}, m);
        }
        return kOk;
      }
      if (ana_in.empty() || ana_out.empty()) {
        std::cerr << "analyze " << ana_kind << ": needs an input file and --out\n";
        return kUsage;
      }
      m.input(ana_in);
      const auto in = load_analyze_input(ana_in);
      std::ostringstream rows;
      if (ana_kind == "scr" || ana_kind == "stride-cdf") {
        const auto per_pid = analysis::scr_by_pid(in.lines(line), window, min_len);
        m.params() = {{"window", window}, {"min_len", min_len}, {"line", line}};
        if (ana_kind == "scr") {
          json pids = json::object();
          std::uint64_t tot = 0, str = 0;
          for (const auto& [pid, s] : per_pid) {
            rows << pid << ',' << s.total_accesses << ',' << s.stream_accesses << ',' << fmt_double(s.scr) << '\n';
            pids[std::to_string(pid)] = {{"accesses", s.total_accesses}, {"stream_accesses", s.stream_accesses}, {"scr", s.scr}};
            tot += s.total_accesses;
            str += s.stream_accesses;
          }
          const double scr = tot ? 100.0 * static_cast<double>(str) / static_cast<double>(tot) : 0.0;
          write_analysis(ana_out, "scr", "pid,accesses,stream_accesses,scr", rows.str(),
                         {{"scr", scr}, {"accesses", tot}, {"stream_accesses", str}, {"pids", pids}}, m);
          std::cout << "SCR " << fmt_double(scr) << "%\n";
        } else {
          analysis::StreamStats all;
          for (const auto& [pid, s] : per_pid)
            for (const auto& [k, v] : s.stride_histogram) all.stride_histogram[k] += v;
          const auto cdf = analysis::stride_cdf(all);
          json pts = json::array();
          for (const auto& p : cdf) {
            rows << static_cast<std::int64_t>(p.x) << ',' << all.stride_histogram[static_cast<std::int64_t>(p.x)] << ','
                 << fmt_double(p.cumulative) << '\n';
            pts.push_back({{"stride", p.x}, {"cumulative", p.cumulative}});
          }
          write_analysis(ana_out, "stride-cdf", "stride,weight,cumulative", rows.str(), {{"cdf", pts}}, m);
          std::cout << cdf.size() << " distinct strides\n";
        }
      } else if (ana_kind == "prefetch") {
        std::map<Pid, analysis::SequentialPrefetcher> pf;
        for (const auto& l : in.lines(line)) pf.try_emplace(l.pid, trigger).first->second.access(l.line);
        json pids = json::object();
        std::uint64_t dem = 0, pre = 0;
        for (const auto& [pid, p] : pf) {
          const auto r = p.report();
          rows << pid << ',' << r.demand_accesses << ',' << r.prefetches << ',' << fmt_double(r.prefetch_rate) << '\n';
          pids[std::to_string(pid)] = {{"demand", r.demand_accesses}, {"prefetches", r.prefetches}, {"prefetch_rate", r.prefetch_rate}};
          dem += r.demand_accesses;
          pre += r.prefetches;
        }
        const double rate = dem + pre ? 100.0 * static_cast<double>(pre) / static_cast<double>(dem + pre) : 0.0;
        m.params() = {{"trigger", trigger}, {"line", line}};
        write_analysis(ana_out, "prefetch", "pid,demand,prefetches,prefetch_rate", rows.str(),
                       {{"prefetch_rate", rate}, {"pids", pids}}, m);
        std::cout << "prefetch rate " << fmt_double(rate) << "%\n";
      } else if (ana_kind == "runlen") {
        const auto st = analysis::run_lengths(in.pids());
        for (const auto& [len, n] : st.histogram) rows << len << ',' << n << ',' << fmt_double(st.fraction_at_most(len)) << '\n';
        write_analysis(ana_out, "runlen", "run_length,runs,cumulative", rows.str(),
                       {{"runs", st.runs}, {"references", st.total_refs}}, m);
        std::cout << st.runs << " runs\n";
      } else if (ana_kind == "reuse") {
        const auto h = analysis::reuse_distance(in.addrs(), granularity, depth);
        for (std::size_t d = 1; d <= h.depth; ++d) rows << d << ',' << h.at(d) << '\n';
        rows << "overflow," << h.overflow << "\ncold," << h.cold << '\n';
        m.params() = {{"granularity", granularity}, {"depth", depth}};
        write_analysis(ana_out, "reuse", "distance,count", rows.str(),
                       {{"depth", h.depth}, {"overflow", h.overflow}, {"cold", h.cold}, {"distance", h.distance}}, m);
        std::cout << h.total() << " accesses, " << h.cold << " cold, " << h.overflow << " beyond depth\n";
      } else if (ana_kind == "hot") {
        const auto hp = analysis::hot_pages(in.addrs(), granularity, top);
        json arr = json::array();
        for (std::size_t i = 0; i < hp.size(); ++i) {
          rows << i + 1 << ",0x" << std::hex << hp[i].page << std::dec << ',' << hp[i].count << '\n';
          arr.push_back({{"page", hp[i].page}, {"count", hp[i].count}});
        }
        m.params() = {{"page_size", granularity}, {"top", top}};
        write_analysis(ana_out, "hot", "rank,page,count", rows.str(), {{"pages", arr}}, m);
      } else if (ana_kind == "intervals" || ana_kind == "fifo") {
        if (in.is_virtual) throw Error(ErrorKind::ParseError, ana_kind + " needs physical references");
        if (!ana_platform.empty()) m.input(ana_platform);
        const auto P = load_platform(ana_platform);
        if (ana_kind == "intervals") {
          const auto s = analysis::interval_stats(in.phys, interval, P.mem, P.address_mapping());
          for (const auto& iv : s.intervals)
            rows << iv.index << ',' << iv.start_cycle << ',' << iv.refs << ',' << iv.bytes << ','
                 << fmt_double(iv.bandwidth_bytes_per_s) << '\n';
          m.params() = {{"interval_cycles", interval}};
          write_analysis(ana_out, "intervals", "index,start_cycle,refs,bytes,bandwidth_bytes_per_s", rows.str(),
                         {{"intervals", s.intervals.size()}, {"bytes", s.totals.bytes},
                          {"bank_refs", s.totals.bank_refs}, {"bit_toggles", s.totals.bit_toggles}},
                         m);
        } else {
          FifoParams fp{fifo_depth, link_bps, record_bits, 1024};
          const auto r = simulate_fifo(in.phys, fp, P.mem);
          for (const auto& smp : r.occupancy_series) rows << smp.cycle << ',' << smp.occupancy << '\n';
          m.params() = {{"depth", fifo_depth}, {"link_bps", link_bps}, {"record_bits", record_bits}};
          write_analysis(ana_out, "fifo", "cycle,occupancy", rows.str(),
                         {{"max_occupancy", r.max_occupancy}, {"overflow_events", r.overflow_events},
                          {"dropped_records", r.dropped_records}, {"accepted_records", r.accepted_records}},
                         m);
          std::cout << "max occupancy " << r.max_occupancy << ", overflow events " << r.overflow_events << "\n";
        }
      }
      return kOk;
    }

    if (*ver) {
      const fs::path dir(ver_dir);
      const fs::path out = ver_out.empty() ? dir / "out" : fs::path(ver_out);
      RunManifest m("verify");
      m.input(dir / "scenario.json");
      const auto spec = workload::parse_scenario(read_json_file(dir / "scenario.json"));
      write_generated(out / "gen", workload::generate(spec));
      const auto rep = verify_scenario_dir(out / "gen", out / "replay");
      write_text_atomic(out / "report.json", rep.to_json().dump(2) + "\n");
      m.output(out / "gen");
      m.output(out / "replay");
      m.output(out / "report.json");
      m.write(out / "manifest.json");
      for (const auto& s : rep.stages) {
        std::cout << (s.passed ? "PASS " : "FAIL ") << s.stage;
        if (!s.passed) std::cout << " (" << s.mismatches << " mismatches: " << s.details.front() << ")";
        std::cout << "\n";
      }
      std::cout << rep.scenario << ": " << (rep.passed() ? "conforms" : "does not conform") << "\n";
      return rep.passed() ? kOk : kConformance;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
