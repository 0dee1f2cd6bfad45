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
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "dimmtrace/cdf.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/mapping_index.hpp"

namespace dimmtrace::analysis {

inline constexpr std::size_t kDefaultStreamWindow = 32;
inline constexpr std::size_t kDefaultMinStreamLength = 3;

struct Stream {
  std::int64_t start_line = 0;
  std::int64_t stride = 0;  // in cachelines
  std::uint64_t length = 0;
  bool operator==(const Stream&) const = default;
  auto operator<=>(const Stream&) const = default;
};

struct StreamStats {
  std::uint64_t total_accesses = 0;
  std::uint64_t stream_accesses = 0;
  double scr = 0.0;  // percent
  std::map<std::int64_t, std::uint64_t> stride_histogram;  // stride -> stream members
  std::vector<Stream> streams;
};

/// Scan-window fixed-stride stream detector over cacheline indices.
///
/// Each access i looks back over the previous `window` accesses, newest
/// first. If some earlier access j already ends a progression of stride
/// s = line[i] - line[j], access i extends it and nothing else happens.
/// Otherwise i pairs with every earlier distinct line in the window,
/// opening one length-2 candidate per stride. A candidate that reaches
/// `min_len` members marks all of its members, including earlier ones, as
/// stream accesses.
class StreamDetector {
 public:
  explicit StreamDetector(std::size_t window = kDefaultStreamWindow, std::size_t min_len = kDefaultMinStreamLength)
      : window_(window), min_len_(min_len), ring_(window * (min_len > 1 ? min_len - 1 : 1) + 1) {
    if (window < 2) throw Error(ErrorKind::InvalidConfig, "stream window must be >= 2");
    if (min_len < 2) throw Error(ErrorKind::InvalidConfig, "min stream length must be >= 2");
  }

  void add(std::int64_t line) {
    const std::uint64_t i = pos_;
    if (i >= ring_.size()) retire(i - ring_.size());
    if (i > window_) expire(i - window_ - 1);

    Slot& slot = ring_[i % ring_.size()];
    slot.line = line;
    slot.marked = false;
    slot.nodes.clear();
    slot.keys.clear();

    const std::uint64_t lo = i > window_ ? i - window_ : 0;
    if (!try_extend(i, line, lo)) open_pairs(i, line, lo);

    last_pos_[line] = i;
    ++pos_;
  }

  /// Flushes pending marks. Call once, after the last add().
  StreamStats finish() {
    for (std::uint64_t p = pos_ > ring_.size() ? pos_ - ring_.size() : 0; p < pos_; ++p) retire(p);
    StreamStats st;
    st.total_accesses = pos_;
    st.stream_accesses = marked_count_;
    st.scr = pos_ == 0 ? 0.0 : 100.0 * static_cast<double>(marked_count_) / static_cast<double>(pos_);
    st.streams = streams_;
    for (const auto& s : streams_) st.stride_histogram[s.stride] += s.length;
    return st;
  }

 private:
  struct Node {
    std::int64_t stride;
    std::uint64_t len;
    std::uint64_t pred;
    std::int64_t stream;  // -1 until the candidate qualifies
  };
  struct Slot {
    std::int64_t line = 0;
    bool marked = false;
    std::vector<Node> nodes;
    std::vector<std::int64_t> keys;  // expect_ keys owned by this position
  };
  struct Expect {
    std::uint64_t pos;
    std::uint32_t node;
  };

  Slot& slot(std::uint64_t p) { return ring_[p % ring_.size()]; }

  const Node* find_node(std::uint64_t p, std::int64_t stride) {
    for (const auto& n : slot(p).nodes)
      if (n.stride == stride) return &n;
    return nullptr;
  }

  bool try_extend(std::uint64_t i, std::int64_t line, std::uint64_t lo) {
    auto it = expect_.find(line);
    if (it == expect_.end()) return false;
    const Expect* best = nullptr;
    for (const auto& e : it->second)
      if (e.pos >= lo && (!best || e.pos > best->pos)) best = &e;
    if (!best) return false;
    const Node pred = slot(best->pos).nodes[best->node];
    add_node(i, line, Node{pred.stride, pred.len + 1, best->pos, pred.stream});
    return true;
  }

  void open_pairs(std::uint64_t i, std::int64_t line, std::uint64_t lo) {
    for (std::uint64_t j = i; j-- > lo;) {
      const std::int64_t lj = slot(j).line;
      if (lj == line) continue;
      auto lp = last_pos_.find(lj);
      if (lp == last_pos_.end() || lp->second != j) continue;
      add_node(i, line, Node{line - lj, 2, j, -1});
    }
  }

  void add_node(std::uint64_t i, std::int64_t line, Node n) {
    Slot& s = slot(i);
    if (n.len >= min_len_) {
      if (n.stream < 0) qualify(i, n);
      else streams_[static_cast<std::size_t>(n.stream)].length =
          std::max<std::uint64_t>(streams_[static_cast<std::size_t>(n.stream)].length, n.len);
      s.marked = true;
    }
    s.nodes.push_back(n);
    const std::int64_t key = line + n.stride;
    expect_[key].push_back({i, static_cast<std::uint32_t>(s.nodes.size() - 1)});
    s.keys.push_back(key);
  }

  // Walks back to the head of a candidate that just reached min_len.
  void qualify(std::uint64_t i, Node& n) {
    std::uint64_t p = n.pred;
    std::uint64_t steps = n.len - 1;
    while (true) {
      slot(p).marked = true;
      if (--steps == 0) break;
      const Node* pn = find_node(p, n.stride);
      p = pn->pred;
    }
    n.stream = static_cast<std::int64_t>(streams_.size());
    streams_.push_back({slot(p).line, n.stride, n.len});
    (void)i;
  }

  void expire(std::uint64_t p) {
    Slot& s = slot(p);
    for (auto key : s.keys) {
      auto it = expect_.find(key);
      if (it == expect_.end()) continue;
      std::erase_if(it->second, [p](const Expect& e) { return e.pos == p; });
      if (it->second.empty()) expect_.erase(it);
    }
    s.keys.clear();
    auto lp = last_pos_.find(s.line);
    if (lp != last_pos_.end() && lp->second == p) last_pos_.erase(lp);
  }

  void retire(std::uint64_t p) {
    if (slot(p).marked) ++marked_count_;
    slot(p).marked = false;
  }

  std::size_t window_;
  std::size_t min_len_;
  std::vector<Slot> ring_;
  std::unordered_map<std::int64_t, std::vector<Expect>> expect_;
  std::unordered_map<std::int64_t, std::uint64_t> last_pos_;
  std::vector<Stream> streams_;
  std::uint64_t pos_ = 0;
  std::uint64_t marked_count_ = 0;
};

inline StreamStats detect_streams(std::span<const std::int64_t> lines, std::size_t window = kDefaultStreamWindow,
                                  std::size_t min_len = kDefaultMinStreamLength) {
  StreamDetector d(window, min_len);
  for (auto l : lines) d.add(l);
  return d.finish();
}

/// Cacheline indices of byte addresses.
template <typename Range, typename Proj>
std::vector<std::int64_t> to_lines(const Range& refs, Proj addr_of, std::uint64_t line_bytes = 64) {
  std::vector<std::int64_t> out;
  out.reserve(std::size(refs));
  for (const auto& r : refs) out.push_back(static_cast<std::int64_t>(addr_of(r) / line_bytes));
  return out;
}

struct PidLine {
  Pid pid = 0;
  std::int64_t line = 0;
};

/// Runs the detector separately on each pid's accesses.
inline std::map<Pid, StreamStats> scr_by_pid(std::span<const PidLine> refs, std::size_t window = kDefaultStreamWindow,
                                             std::size_t min_len = kDefaultMinStreamLength) {
  std::map<Pid, StreamDetector> detectors;
  for (const auto& r : refs) {
    auto it = detectors.try_emplace(r.pid, window, min_len).first;
    it->second.add(r.line);
  }
  std::map<Pid, StreamStats> out;
  for (auto& [pid, d] : detectors) out[pid] = d.finish();
  return out;
}

/// Stride distribution of detected streams, weighted by stream length.
inline std::vector<CdfPoint> stride_cdf(const StreamStats& stats) { return make_cdf(stats.stride_histogram); }

}  // namespace dimmtrace::analysis
