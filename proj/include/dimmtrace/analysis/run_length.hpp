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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dimmtrace/cdf.hpp"
#include "dimmtrace/mapping_index.hpp"

namespace dimmtrace::analysis {

struct RunLengthStats {
  std::map<std::uint64_t, std::uint64_t> histogram;  // run length -> runs
  std::uint64_t runs = 0;
  std::uint64_t total_refs = 0;
  std::vector<CdfPoint> cdf;

  double fraction_at_most(std::uint64_t len) const { return cdf_at(cdf, static_cast<double>(len)); }
};

/// Lengths of maximal runs of consecutive references from the same pid.
class RunLengthCounter {
 public:
  void add(Pid pid) {
    if (cur_ && *cur_ == pid) {
      ++len_;
    } else {
      close();
      cur_ = pid;
      len_ = 1;
    }
    ++stats_.total_refs;
  }

  RunLengthStats finish() {
    close();
    stats_.cdf = make_cdf(stats_.histogram);
    return stats_;
  }

 private:
  void close() {
    if (len_ == 0) return;
    ++stats_.histogram[len_];
    ++stats_.runs;
    len_ = 0;
  }

  std::optional<Pid> cur_;
  std::uint64_t len_ = 0;
  RunLengthStats stats_;
};

inline RunLengthStats run_lengths(std::span<const Pid> pids) {
  RunLengthCounter c;
  for (auto p : pids) c.add(p);
  return c.finish();
}

}  // namespace dimmtrace::analysis
