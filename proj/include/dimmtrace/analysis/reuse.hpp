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
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dimmtrace/error.hpp"

namespace dimmtrace::analysis {

inline constexpr std::size_t kReuseStackDepth = 128;

struct ReuseHistogram {
  std::size_t depth = kReuseStackDepth;
  std::vector<std::uint64_t> distance;  // distance[d-1] for d in 1..depth
  std::uint64_t overflow = 0;           // re-accesses deeper than depth
  std::uint64_t cold = 0;               // first touches

  std::uint64_t at(std::size_t d) const { return distance.at(d - 1); }
  std::uint64_t total() const {
    std::uint64_t t = overflow + cold;
    for (auto c : distance) t += c;
    return t;
  }
  bool operator==(const ReuseHistogram&) const = default;
};

/// LRU stack distances via a Fenwick tree over access times: the distance
/// of a re-access is the number of distinct blocks touched since the
/// block's previous access, plus one. Distances beyond `depth` land in the
/// overflow bucket, matching a stack that holds only `depth` entries.
class ReuseDistanceCounter {
 public:
  explicit ReuseDistanceCounter(std::size_t depth = kReuseStackDepth) : tree_(1024 + 1, 0) {
    if (depth == 0) throw Error(ErrorKind::InvalidConfig, "reuse depth must be >= 1");
    hist_.depth = depth;
    hist_.distance.assign(depth, 0);
  }

  /// Returns the 1-based stack distance, or 0 for a first touch.
  std::uint64_t access(std::uint64_t block) {
    if (time_ + 1 >= tree_.size()) grow();
    std::uint64_t dist = 0;
    auto it = last_.find(block);
    if (it == last_.end()) {
      ++hist_.cold;
    } else {
      dist = live_ - prefix(it->second) + 1;
      bump(it->second, -1);
      --live_;
      if (dist <= hist_.depth) ++hist_.distance[dist - 1];
      else ++hist_.overflow;
    }
    ++time_;
    bump(time_, +1);
    ++live_;
    last_[block] = time_;
    return dist;
  }

  const ReuseHistogram& histogram() const { return hist_; }

 private:
  std::uint64_t prefix(std::uint64_t i) const {
    std::int64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return static_cast<std::uint64_t>(s);
  }

  void bump(std::uint64_t i, std::int64_t d) {
    for (; i < tree_.size(); i += i & (~i + 1)) tree_[i] += d;
  }

  // Renumbers live blocks 1..n in access order and doubles the capacity.
  void grow() {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> order;
    order.reserve(last_.size());
    for (const auto& [block, t] : last_) order.emplace_back(t, block);
    std::sort(order.begin(), order.end());
    const std::size_t cap = std::max<std::size_t>(1024, order.size() * 2) + 1;
    tree_.assign(cap, 0);
    time_ = 0;
    for (const auto& [t, block] : order) {
      ++time_;
      last_[block] = time_;
      bump(time_, +1);
    }
  }

  std::vector<std::int64_t> tree_;
  std::unordered_map<std::uint64_t, std::uint64_t> last_;
  std::uint64_t time_ = 0;
  std::uint64_t live_ = 0;
  ReuseHistogram hist_;
};

/// Page-granular by default; pass granularity = cacheline size for
/// cacheline-granular distances.
inline ReuseHistogram reuse_distance(std::span<const std::uint64_t> addrs, std::uint64_t granularity = 4096,
                                     std::size_t depth = kReuseStackDepth) {
  if (granularity == 0) throw Error(ErrorKind::InvalidConfig, "granularity must be > 0");
  ReuseDistanceCounter c(depth);
  for (auto a : addrs) c.access(a / granularity);
  return c.histogram();
}

struct HotPage {
  std::uint64_t page = 0;
  std::uint64_t count = 0;
  bool operator==(const HotPage&) const = default;
};

class HotPageCounter {
 public:
  explicit HotPageCounter(std::uint64_t page_size = 4096) : page_size_(page_size) {
    if (page_size == 0) throw Error(ErrorKind::InvalidConfig, "page_size must be > 0");
  }

  void add(std::uint64_t addr) { ++counts_[addr / page_size_]; }

  /// Top pages by count; ties go to the lower page number.
  std::vector<HotPage> top(std::size_t n) const {
    if (n == 0) throw Error(ErrorKind::InvalidConfig, "top_n must be >= 1");
    std::vector<HotPage> all;
    all.reserve(counts_.size());
    for (const auto& [p, c] : counts_) all.push_back({p, c});
    auto cmp = [](const HotPage& a, const HotPage& b) {
      return a.count != b.count ? a.count > b.count : a.page < b.page;
    };
    const auto k = std::min(n, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), cmp);
    all.resize(k);
    return all;
  }

 private:
  std::uint64_t page_size_;
  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
};

inline std::vector<HotPage> hot_pages(std::span<const std::uint64_t> addrs, std::uint64_t page_size, std::size_t top_n) {
  HotPageCounter c(page_size);
  for (auto a : addrs) c.add(a);
  return c.top(top_n);
}

}  // namespace dimmtrace::analysis
