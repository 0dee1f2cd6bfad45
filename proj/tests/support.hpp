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

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dimmtrace/dimmtrace.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(DIMMTRACE_SOURCE_DIR); }
inline fs::path scenario_dir(const std::string& name) { return source_dir() / "scenarios" / name; }

inline std::vector<std::string> shipped_scenarios() {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(source_dir() / "scenarios"))
    if (fs::exists(e.path() / "scenario.json")) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

/// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static unsigned counter = 0;
    path_ = fs::temp_directory_path() /
            ("dimmtrace-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline dimmtrace::workload::ScenarioSpec load_spec(const std::string& name) {
  return dimmtrace::workload::parse_scenario(dimmtrace::read_json_file(scenario_dir(name) / "scenario.json"));
}

inline dimmtrace::workload::ScenarioSpec spec_from(const std::string& json_text) {
  return dimmtrace::workload::parse_scenario(nlohmann::json::parse(json_text));
}

/// Random cycle-ordered refs on one channel with gaps drawn from `gaps`.
inline std::vector<dimmtrace::PhysRef> random_refs(std::mt19937_64& rng, std::size_t n, dimmtrace::ChannelId ch,
                                                   std::uint64_t max_gap, std::uint64_t max_line = 1u << 26) {
  std::vector<dimmtrace::PhysRef> out;
  dimmtrace::Cycle c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    c += rng() % (max_gap + 1);
    out.push_back({(rng() % max_line) * 64, (rng() & 1) ? dimmtrace::Rw::Write : dimmtrace::Rw::Read, c, ch});
  }
  return out;
}

}  // namespace testing_support
