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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "dimmtrace/dimmtrace.hpp"
#include "oracles/fifo_ticks.hpp"
#include "oracles/lru_stack.hpp"
#include "oracles/sidon.hpp"
#include "oracles/sort_merge.hpp"
#include "oracles/stream_reference.hpp"
#include "support.hpp"

using namespace dimmtrace;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) note << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

struct Replay {
  workload::Ledger ledger;
  PipelineResult res;
};

class ScenarioCache {
 public:
  explicit ScenarioCache(const fs::path& root) : root_(root) {}

  const Replay& get(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    const auto g = workload::generate(testing_support::load_spec(name));
    write_generated(root_ / name / "gen", g);
    Replay r{g.ledger, run_pipeline(root_ / name / "gen", root_ / name / "replay")};
    return cache_.emplace(name, std::move(r)).first->second;
  }

 private:
  fs::path root_;
  std::map<std::string, Replay> cache_;
};

// ---- 1 ------------------------------------------------------------------
void bandwidth_model(Outcome& o) {
  MemConfig c;
  c.freq_mhz = 400;
  c.bus_width_bits = 128;
  c.cacheline_bytes = 64;
  const auto t0 = Clock::now();
  const double peak = peak_trace_bandwidth(c, 40);
  const double cmd = command_frequency(400, 2, 4);
  const double ms = ms_since(t0);
  o.check(peak == 4e9, "peak " + fmt(peak, 12));
  o.check(cmd == 100e6, "command frequency " + fmt(cmd, 12));
  o.check(ms < 1.0, "runtime " + fmt(ms) + " ms");
  o.note << "peak " << fmt(peak / 1e9) << " Gb/s, cmdfrq " << fmt(cmd / 1e6) << " MHz, " << fmt(ms, 3) << " ms";
}

// ---- 2 ------------------------------------------------------------------
void codec_round_trip(Outcome& o) {
  std::mt19937_64 rng(2);
  const Cycle specials[] = {15, 16, 17, Cycle{1} << 28, (Cycle{1} << 28) + 1, packed::kMaxDuration};
  std::vector<PhysRef> refs;
  Cycle c = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto pick = rng() % 8;
    c += pick == 0 ? specials[rng() % 6] : (pick < 5 ? rng() % 18 : rng() % 100000);
    refs.push_back({(rng() % packed::kMaxLines) * 64, (rng() & 1) ? Rw::Write : Rw::Read, c, 0});
  }
  const auto t0 = Clock::now();
  const auto bytes = encode_stream(refs, TraceFileHeader{});
  const auto back = decode_stream(bytes).first;
  const double ms = ms_since(t0);
  std::size_t mismatches = back.size() == refs.size() ? 0 : refs.size();
  for (std::size_t i = 0; i < std::min(back.size(), refs.size()); ++i) mismatches += back[i] == refs[i] ? 0 : 1;
  o.check(mismatches == 0, std::to_string(mismatches) + " mismatches");
  o.check(ms < 5000, "runtime " + fmt(ms) + " ms");
  o.note << refs.size() << " refs, " << bytes.size() << " bytes, " << mismatches << " mismatches, " << fmt(ms, 4) << " ms";
}

// ---- 3 ------------------------------------------------------------------
void merge_oracle(Outcome& o) {
  std::mt19937_64 rng(3);
  std::size_t bad = 0, total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<PhysRef>> ch(3);
    for (unsigned k = 0; k < 3; ++k)
      ch[k] = testing_support::random_refs(rng, rng() % 2000, static_cast<ChannelId>(k), 1 + rng() % 6);
    const auto got = merge_channels(ch);
    total += got.size();
    if (got != oracle::sort_merge(ch)) ++bad;
  }
  o.check(bad == 0, std::to_string(bad) + " trials differ");
  o.note << "100 trials, " << total << " refs, " << bad << " mismatching trials";
}

// ---- 4 ------------------------------------------------------------------
void decode_conformance(Outcome& o, ScenarioCache& sc) {
  for (const auto& name : testing_support::shipped_scenarios()) {
    const auto& r = sc.get(name);
    const bool same = r.res.merged == r.ledger.trace();
    o.check(same, name + " trace differs from ledger");
    o.check(r.res.decode_warnings() == 0, name + " has decode warnings");
    o.note << name << "=" << r.res.merged.size() << (same ? "" : "(DIFF)") << " ";
  }
}

// ---- 5 ------------------------------------------------------------------
void semantic_overlay(Outcome& o, ScenarioCache& sc) {
  const auto& r = sc.get("events");
  const auto& ev = r.res.overlay.events;
  o.check(r.res.overlay.normal.size() == 1'000'000, "normal refs " + std::to_string(r.res.overlay.normal.size()));
  o.check(ev.size() == 12, std::to_string(ev.size()) + " events");
  o.check(ev == r.ledger.events, "events differ from ledger");
  bool end_ok = false, user0_ok = false;
  for (const auto& e : ev) {
    end_ok = end_ok || (e.kind == EventKind::EndTracing && e.offset == 0x40);
    user0_ok = user0_ok || (e.kind == EventKind::User && e.user_id == 0 && e.offset == 0x1000);
  }
  o.check(end_ok, "END_TRACING at 0x40 missing");
  o.check(user0_ok, "USER(0) at 0x1000 missing");
  o.note << ev.size() << " events over " << r.res.overlay.normal.size() << " normal refs";
}

// ---- 6 ------------------------------------------------------------------
void virtual_translation(Outcome& o, ScenarioCache& sc) {
  for (const char* name : {"twocore", "unmapped2pct"}) {
    const auto& r = sc.get(name);
    const std::uint64_t page = r.res.platform.page_size;
    std::uint64_t offset_bad = 0;
    for (std::size_t i = 0; i < r.res.virtual_refs.size(); ++i)
      if (const auto& v = r.res.virtual_refs[i]; v && v->virt_addr % page != r.res.overlay.normal[i].addr % page)
        ++offset_bad;
    o.check(offset_bad == 0, std::string(name) + " offsets changed");
    const auto& t = r.res.translation;
    o.note << name << " miss_rate " << fmt(100.0 * t.miss_rate()) << "% (" << t.misses << "/" << t.total << ") ";
  }
  const auto& full = sc.get("twocore").res.translation;
  o.check(full.total > 0 && full.misses == 0, "fully mapped scenario has misses");
  const auto& part = sc.get("unmapped2pct").res.translation;
  o.check(part.misses * 50 == part.total && part.miss_rate() == 0.02, "unmapped share is not exactly 2%");
}

// ---- 7 ------------------------------------------------------------------
void dma_classification(Outcome& o, ScenarioCache& sc) {
  const auto& r = sc.get("filecopy");
  const auto& s = r.res.dma.summary;
  const auto& want = r.ledger.expected;
  for (auto l : {RefLabel::CpuRead, RefLabel::CpuWrite, RefLabel::DmaRead, RefLabel::DmaWrite}) {
    o.check(s.count(l) == want.label_counts[static_cast<std::size_t>(l)], to_string(l) + " count");
    o.check(s.percent(l) == want.label_percent(l), to_string(l) + " percent");
    o.note << to_string(l) << " " << fmt(s.percent(l), 4) << "% ";
  }
  o.check(s.request_size_cdf == make_cdf(want.dma_size_histogram), "request size CDF differs");
  o.note << "(DMA " << fmt(s.percent(RefLabel::DmaRead) + s.percent(RefLabel::DmaWrite), 4) << "%), "
         << s.request_size_cdf.size() << " CDF steps";
}

// ---- 8 ------------------------------------------------------------------
// Reuse distances depend only on which accesses share a page, so every
// sequence over 4 pages is a relabeling of a restricted-growth string.
void for_each_rgs(std::vector<std::uint64_t>& seq, std::size_t len, std::uint64_t labels, std::uint64_t used,
                  const std::function<void(const std::vector<std::uint64_t>&)>& fn) {
  if (seq.size() == len) {
    fn(seq);
    return;
  }
  for (std::uint64_t l = 0; l <= used && l < labels; ++l) {
    seq.push_back(l);
    for_each_rgs(seq, len, labels, std::max(used, l + 1), fn);
    seq.pop_back();
  }
}

void reuse_distance_check(Outcome& o) {
  std::uint64_t sequences = 0, bad = 0;
  std::vector<std::uint64_t> seq, addrs;
  for (std::size_t len = 1; len <= 12; ++len)
    for_each_rgs(seq, len, 4, 0, [&](const std::vector<std::uint64_t>& s) {
      ++sequences;
      addrs.assign(s.begin(), s.end());
      for (auto& a : addrs) a *= 4096;
      for (std::size_t depth : {std::size_t{2}, std::size_t{128}})
        if (!(analysis::reuse_distance(addrs, 4096, depth) == oracle::lru_stack(s, depth))) ++bad;
    });
  o.check(bad == 0, std::to_string(bad) + " exhaustive mismatches");

  std::mt19937_64 rng(8);
  std::uint64_t rbad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint64_t pages = 2 + rng() % 400;
    std::vector<std::uint64_t> blocks(10000);
    for (auto& b : blocks) b = rng() % pages;
    std::vector<std::uint64_t> a(blocks.begin(), blocks.end());
    for (auto& x : a) x = x * 4096 + rng() % 4096;
    if (!(analysis::reuse_distance(a) == oracle::lru_stack(blocks, 128))) ++rbad;
  }
  o.check(rbad == 0, std::to_string(rbad) + " random mismatches");

  auto ring = [](std::uint64_t k) {
    std::vector<std::uint64_t> a;
    for (std::uint64_t p = 0; p < k; ++p) a.push_back(p * 4096);
    a.push_back(0);
    return a;
  };
  const auto at128 = analysis::reuse_distance(ring(128));
  const auto at129 = analysis::reuse_distance(ring(129));
  o.check(at128.at(128) == 1 && at128.overflow == 0, "distance 128 not in last bucket");
  o.check(at129.at(128) == 0 && at129.overflow == 1, "distance 129 not in overflow");
  o.note << sequences << " canonical sequences (len<=12, 4 pages) x depths {2,128}, 100 random traces, "
         << bad + rbad << " mismatches; d=128 bucket " << at128.at(128) << ", d=129 overflow " << at129.overflow;
}

// ---- 9 ------------------------------------------------------------------
bool same_streams(const analysis::StreamStats& a, const analysis::StreamStats& b) {
  return a.total_accesses == b.total_accesses && a.stream_accesses == b.stream_accesses &&
         a.stride_histogram == b.stride_histogram && a.streams == b.streams;
}

// One stride-1 stream whose members sit `gap` accesses apart, separated by
// progression-free filler far away from it.
std::vector<std::int64_t> spaced_stream(std::size_t gap, std::size_t members) {
  const auto filler = oracle::sidon_set(1009, 1009);
  std::vector<std::int64_t> lines;
  std::size_t f = 0;
  for (std::size_t m = 0; m < members; ++m) {
    lines.push_back(1'000'000'000 + static_cast<std::int64_t>(m));
    for (std::size_t k = 0; k + 1 < gap && m + 1 < members; ++k) lines.push_back(filler[f++ % filler.size()]);
  }
  return lines;
}

void scr_check(Outcome& o) {
  std::vector<std::int64_t> seq(1000);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = static_cast<std::int64_t>(i);
  const double scr_seq = analysis::detect_streams(seq).scr;
  o.check(scr_seq == 100.0, "sequential SCR " + fmt(scr_seq));

  auto sidon = oracle::sidon_set(1009, 1000);
  std::shuffle(sidon.begin(), sidon.end(), std::mt19937_64(9));
  const double scr_sidon = analysis::detect_streams(sidon).scr;
  o.check(scr_sidon == 0.0, "unique-difference SCR " + fmt(scr_sidon));

  std::mt19937_64 rng(99);
  int bad = 0, default_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t window = 2 + rng() % 40, min_len = 2 + rng() % 4;
    std::vector<std::int64_t> lines;
    const std::size_t n = 500 + rng() % 3000;
    while (lines.size() < n) {
      if (rng() % 3 == 0) {
        const std::int64_t base = rng() % 300, stride = static_cast<std::int64_t>(rng() % 9) - 4;
        for (int k = 0, len = 2 + rng() % 8; k < len; ++k) lines.push_back(base + k * stride);
      } else {
        lines.push_back(rng() % 300);
      }
    }
    if (!same_streams(analysis::detect_streams(lines, window, min_len), oracle::reference_streams(lines, window, min_len)))
      ++bad;
    if (!same_streams(analysis::detect_streams(lines), oracle::reference_streams(lines, 32, 3))) ++default_bad;
  }
  o.check(bad == 0, std::to_string(bad) + " random traces differ from the reference");
  o.check(default_bad == 0, std::to_string(default_bad) + " default-window traces differ from window 32");

  // The default window reaches exactly 32 accesses back.
  const auto in_reach = analysis::detect_streams(spaced_stream(32, 40));
  const auto out_of_reach = analysis::detect_streams(spaced_stream(33, 40));
  o.check(in_reach.stream_accesses == 40, "members 32 apart not detected");
  o.check(out_of_reach.stream_accesses == 0, "members 33 apart detected");
  o.note << "sequential " << fmt(scr_seq) << "%, unique-difference " << fmt(scr_sidon) << "%, " << bad + default_bad
         << " reference mismatches over 100 traces; gap 32 -> " << in_reach.stream_accesses << " members, gap 33 -> "
         << out_of_reach.stream_accesses;
}

// ---- 10 -----------------------------------------------------------------
std::vector<std::int64_t> two_process_lines(std::uint64_t quantum) {
  const std::string spec = R"({"name": "prefetch", "seed": 10, "tracing": false,
    "page_pool": {"base": "0x40000000", "pages": 2048},
    "phases": [{"quantum": )" + std::to_string(quantum) + R"(, "actors": [
      {"type": "process", "pid": 1, "pages": "linear", "pattern": {"kind": "sequential", "start": 0, "count": 16384}},
      {"type": "process", "pid": 2, "pages": "linear", "pattern": {"kind": "sequential", "start": "0x10000000", "count": 16384}}
    ]}]})";
  const auto g = workload::generate(testing_support::spec_from(spec));
  std::vector<std::int64_t> lines;
  for (const auto& r : g.ledger.refs) lines.push_back(static_cast<std::int64_t>(r.ref.addr / 64));
  return lines;
}

void prefetch_check(Outcome& o) {
  std::vector<std::int64_t> seq(1000);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = static_cast<std::int64_t>(i);
  const auto rep = analysis::emulate_seq_prefetcher(seq);
  o.check(rep.prefetch_rate == 99.7, "sequential prefetch rate " + fmt(rep.prefetch_rate, 10));
  o.note << "sequential " << fmt(rep.prefetch_rate) << "%; quanta:";
  double prev = 101.0;
  for (std::uint64_t q = 1024; q >= 1; q /= 2) {
    const double rate = analysis::emulate_seq_prefetcher(two_process_lines(q)).prefetch_rate;
    o.check(rate <= prev, "rate rises at quantum " + std::to_string(q));
    prev = rate;
    o.note << " " << q << "->" << fmt(rate, 4);
  }
  o.check(prev < 1.0, "no collapse at quantum 1");
}

// ---- 11 -----------------------------------------------------------------
void run_length_check(Outcome& o, ScenarioCache& sc) {
  const auto& rl = sc.get("twocore").res.run_lengths;
  const double frac = rl.fraction_at_most(40);
  o.check(frac >= 0.95, "fraction " + fmt(frac));
  o.check(rl.histogram == sc.get("twocore").ledger.expected.run_length_histogram, "histogram differs from ledger");
  o.note << rl.runs << " runs, " << fmt(100.0 * frac, 5) << "% of runs <= 40";
}

// ---- 12 -----------------------------------------------------------------
bool fifo_agrees(const FifoReport& got, const oracle::FifoOutcome& want) {
  return got.max_occupancy == want.max_occupancy && got.overflow_events == want.overflow_events &&
         got.dropped_records == want.dropped && got.accepted_records == want.accepted;
}

void fifo_check(Outcome& o) {
  const MemConfig mem;  // 200 MHz
  const FifoParams fp{16 * 1024, 1'000'000'000, 32, 1024};
  // One time unit is 1/1e9 s: 5 units per 200 MHz cycle, 32 per 32-bit record at 1 Gb/s.
  const std::uint64_t ticks_per_cycle = 5, service_ticks = 32;

  // 30 MB/s of 4-byte records: 7.5M records/s, one per 80/3 cycles.
  std::vector<PhysRef> steady;
  for (std::uint64_t i = 0; i < 1'000'000; ++i) steady.push_back({(i % 4096) * 64, Rw::Read, i * 80 / 3, 0});
  const auto s = simulate_fifo(steady, fp, mem);
  const auto so = oracle::fifo_ticks(steady, fp.depth, ticks_per_cycle, service_ticks);
  o.check(s.overflow_events == 0 && s.dropped_records == 0, "steady rate overflowed");
  o.check(fifo_agrees(s, so), "steady result differs from oracle");

  // One record per cycle is 6.4x what the link drains.
  std::vector<PhysRef> burst;
  for (std::uint64_t i = 0; i < 100'000; ++i) burst.push_back({(i % 4096) * 64, Rw::Read, i, 0});
  const auto b = simulate_fifo(burst, fp, mem);
  const auto bo = oracle::fifo_ticks(burst, fp.depth, ticks_per_cycle, service_ticks);
  o.check(b.overflow_events > 0, "burst did not overflow");
  o.check(fifo_agrees(b, bo), "burst result differs from oracle");
  o.note << "steady: max occupancy " << s.max_occupancy << ", overflows " << s.overflow_events << "; burst: max "
         << b.max_occupancy << ", overflow events " << b.overflow_events << ", dropped " << b.dropped_records
         << " (oracle " << bo.dropped << ")";
}

// ---- 13 -----------------------------------------------------------------
int run_cli(const std::string& args) {
  const int st = std::system((std::string(DIMMTRACE_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::map<std::string, Bytes> snapshot(const fs::path& dir) {
  std::map<std::string, Bytes> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).string();
    if (rel == "manifest.json") continue;  // carries a timestamp
    out[rel] = read_file_bytes(e.path());
  }
  return out;
}

void end_to_end(Outcome& o, const fs::path& root) {
  const auto t0 = Clock::now();
  std::size_t files = 0;
  for (const auto& name : testing_support::shipped_scenarios()) {
    const auto dir = testing_support::scenario_dir(name);
    const auto a = root / (name + "-a"), b = root / (name + "-b");
    const int ca = run_cli("verify '" + dir.string() + "' --out '" + a.string() + "'");
    const int cb = run_cli("verify '" + dir.string() + "' --out '" + b.string() + "'");
    o.check(ca == 0 && cb == 0, name + " exit codes " + std::to_string(ca) + "," + std::to_string(cb));
    const auto sa = snapshot(a), sb = snapshot(b);
    o.check(!sa.empty() && sa == sb, name + " outputs differ between runs");
    files += sa.size();
  }
  const double s = ms_since(t0) / 1000.0;
  o.check(s < 300, "runtime " + fmt(s) + " s");
  o.note << testing_support::shipped_scenarios().size() << " scenarios x 2 runs, " << files
         << " files compared, " << fmt(s, 3) << " s";
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  testing_support::TempDir tmp("acceptance");
  ScenarioCache sc(tmp / "replays");

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"bandwidth model", bandwidth_model},
      {"codec round trip", codec_round_trip},
      {"merge oracle", merge_oracle},
      {"decode conformance", [&](Outcome& o) { decode_conformance(o, sc); }},
      {"semantic overlay", [&](Outcome& o) { semantic_overlay(o, sc); }},
      {"virtual translation", [&](Outcome& o) { virtual_translation(o, sc); }},
      {"DMA classification", [&](Outcome& o) { dma_classification(o, sc); }},
      {"reuse distance", reuse_distance_check},
      {"stream coverage rate", scr_check},
      {"prefetcher emulation", prefetch_check},
      {"run lengths", [&](Outcome& o) { run_length_check(o, sc); }},
      {"FIFO sizing", fifo_check},
      {"end-to-end determinism", [&](Outcome& o) { end_to_end(o, tmp / "verify"); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << std::setw(2) << i + 1 << " " << criteria[i].first << ": "
              << o.note.str() << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed in "
            << fmt(ms_since(t0) / 1000.0, 3) << " s\n";
  return failed == 0 ? 0 : 1;
}
