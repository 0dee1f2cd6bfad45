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
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dimmtrace/cdf.hpp"
#include "dimmtrace/pipeline.hpp"
#include "dimmtrace/workload/generator.hpp"

namespace dimmtrace {

struct StageResult {
  StageResult() = default;
  explicit StageResult(std::string name) : stage(std::move(name)) {}

  std::string stage;
  bool passed = true;
  std::uint64_t mismatches = 0;
  std::vector<std::string> details;  // first few mismatches

  void fail(const std::string& what) {
    passed = false;
    ++mismatches;
    if (details.size() < 8) details.push_back(what);
  }
};

struct ConformanceReport {
  std::string scenario;
  std::vector<StageResult> stages;

  bool passed() const {
    for (const auto& s : stages)
      if (!s.passed) return false;
    return true;
  }

  const StageResult* stage(const std::string& name) const {
    for (const auto& s : stages)
      if (s.stage == name) return &s;
    return nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json st = nlohmann::json::array();
    for (const auto& s : stages)
      st.push_back({{"stage", s.stage}, {"passed", s.passed}, {"mismatches", s.mismatches}, {"details", s.details}});
    return {{"schema_version", 1}, {"scenario", scenario}, {"passed", passed()}, {"stages", st}};
  }
};

namespace verify_detail {

inline std::string ref_str(const PhysRef& r) {
  return "{cycle " + std::to_string(r.cycle) + ", ch " + std::to_string(r.channel) + ", addr " +
         EventDictionary::hex(r.addr) + ", " + (r.rw == Rw::Read ? "R" : "W") + "}";
}

template <typename A, typename B, typename Eq, typename Show>
void compare_seq(StageResult& st, const std::string& what, const A& got, const B& want, Eq eq, Show show) {
  if (got.size() != want.size())
    st.fail(what + ": length " + std::to_string(got.size()) + " != expected " + std::to_string(want.size()));
  const std::size_t n = std::min(got.size(), want.size());
  for (std::size_t i = 0; i < n; ++i)
    if (!eq(got[i], want[i])) st.fail(what + "[" + std::to_string(i) + "]: got " + show(got[i]));
}

template <typename T>
void compare_value(StageResult& st, const std::string& what, const T& got, const T& want) {
  if (!(got == want)) st.fail(what + ": got " + std::to_string(got) + ", expected " + std::to_string(want));
}

}  // namespace verify_detail

/// Compares every pipeline stage against the generator's ledger.
inline ConformanceReport verify_against_ledger(const PipelineResult& res, const workload::Ledger& L) {
  using namespace verify_detail;
  ConformanceReport rep;
  rep.scenario = L.name;

  {
    StageResult st{"decode"};
    const auto want = L.trace();
    compare_seq(st, "trace", res.merged, want, [](const PhysRef& a, const PhysRef& b) { return a == b; }, ref_str);
    compare_value<std::uint64_t>(st, "decode warnings", res.decode_warnings(), 0);
    rep.stages.push_back(std::move(st));
  }
  {
    StageResult st{"overlay"};
    compare_seq(st, "normal", res.overlay.normal, L.refs,
                [](const PhysRef& a, const workload::LedgerRef& b) { return a == b.ref; }, ref_str);
    compare_seq(st, "events", res.overlay.events, L.events,
                [](const SemanticEvent& a, const SemanticEvent& b) { return a == b; },
                [](const SemanticEvent& e) { return to_string(e.kind) + "@" + std::to_string(e.cycle); });
    compare_value<std::uint64_t>(st, "overlay warnings", res.overlay.diagnostics.total(), 0);
    rep.stages.push_back(std::move(st));
  }
  {
    StageResult st{"translate"};
    const std::size_t n = std::min(res.virtual_refs.size(), L.refs.size());
    if (res.virtual_refs.size() != L.refs.size()) st.fail("translated length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      const auto& got = res.virtual_refs[i];
      const auto& want = L.refs[i];
      const bool ok = want.pid < 0 ? !got.has_value()
                                   : got && got->pid == want.pid && want.vaddr && got->virt_addr == *want.vaddr;
      if (!ok) st.fail("ref[" + std::to_string(i) + "] " + ref_str(want.ref));
    }
    compare_value<std::uint64_t>(st, "misses", res.translation.misses, L.expected.unmapped_refs);
    rep.stages.push_back(std::move(st));
  }
  {
    StageResult st{"classify"};
    compare_seq(st, "labels", res.dma.refs, L.refs,
                [](const LabeledRef& a, const workload::LedgerRef& b) {
                  return a.ref == b.ref && a.label == b.label && a.in_window == b.in_window && a.dma_id == b.dma_id;
                },
                [](const LabeledRef& a) { return to_string(a.label) + " " + ref_str(a.ref); });
    for (auto l : {RefLabel::CpuRead, RefLabel::CpuWrite, RefLabel::DmaRead, RefLabel::DmaWrite})
      compare_value<std::uint64_t>(st, to_string(l), res.dma.summary.count(l),
                                   L.expected.label_counts[static_cast<std::size_t>(l)]);
    compare_value<std::uint64_t>(st, "in_window", res.dma.summary.in_window, L.expected.in_window);
    compare_value<std::uint64_t>(st, "dma warnings", res.dma.diagnostics.total(), 0);
    if (!(res.dma.summary.request_size_cdf == make_cdf(L.expected.dma_size_histogram)))
      st.fail("request size CDF differs");
    rep.stages.push_back(std::move(st));
  }
  {
    StageResult st{"runlen"};
    if (res.run_lengths.histogram != L.expected.run_length_histogram) st.fail("run-length histogram differs");
    rep.stages.push_back(std::move(st));
  }
  {
    StageResult st{"streams"};
    for (auto stride : L.expected.process_strides) {
      bool seen = false;
      for (const auto& [pid, s] : res.streams) seen = seen || s.stride_histogram.count(stride) > 0;
      if (!seen) st.fail("stride " + std::to_string(stride) + " not detected");
    }
    rep.stages.push_back(std::move(st));
  }
  return rep;
}

/// Runs the pipeline over `scenario_dir` into `out_dir`; a stage that
/// throws becomes a failed "pipeline" stage instead of aborting.
inline ConformanceReport verify_scenario_dir(const std::filesystem::path& scenario_dir,
                                             const std::filesystem::path& out_dir) {
  const auto ledger = workload::read_ledger(scenario_dir / layout::kLedger);
  try {
    return verify_against_ledger(run_pipeline(scenario_dir, out_dir), ledger);
  } catch (const Error& e) {
    ConformanceReport rep;
    rep.scenario = ledger.name;
    StageResult st{"pipeline"};
    st.fail(e.what());
    rep.stages.push_back(std::move(st));
    return rep;
  }
}

}  // namespace dimmtrace
