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
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

/// Merge order: cycle, then channel id, then input position.
inline bool merge_before(const PhysRef& a, const PhysRef& b) {
  return std::tie(a.cycle, a.channel) < std::tie(b.cycle, b.channel);
}

/// k-way merge over pull sources. A source is any callable returning
/// std::optional<PhysRef>; each must yield references in merge order.
template <typename Source>
class KWayMerger {
 public:
  explicit KWayMerger(std::vector<Source> sources) : sources_(std::move(sources)) {
    last_.resize(sources_.size());
    for (std::size_t i = 0; i < sources_.size(); ++i) pull(i);
  }

  std::optional<PhysRef> next() {
    if (heap_.empty()) return std::nullopt;
    auto [ref, idx] = heap_.top();
    heap_.pop();
    pull(idx);
    return ref;
  }

 private:
  struct Entry {
    PhysRef ref;
    std::size_t source;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return std::tie(a.ref.cycle, a.ref.channel, a.source) > std::tie(b.ref.cycle, b.ref.channel, b.source);
    }
  };

  void pull(std::size_t i) {
    auto r = sources_[i]();
    if (!r) return;
    if (last_[i] && merge_before(*r, *last_[i]))
      throw Error(ErrorKind::UnsortedChannel,
                  "input " + std::to_string(i) + " goes back to cycle " + std::to_string(r->cycle));
    last_[i] = *r;
    heap_.push({*r, i});
  }

  std::vector<Source> sources_;
  std::vector<std::optional<PhysRef>> last_;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
};

/// Merges per-channel traces that share one clock domain.
inline std::vector<PhysRef> merge_channels(std::span<const std::vector<PhysRef>> channels) {
  using Source = std::function<std::optional<PhysRef>()>;
  std::vector<Source> sources;
  std::size_t total = 0;
  for (const auto& ch : channels) {
    total += ch.size();
    sources.emplace_back([&ch, i = std::size_t{0}]() mutable -> std::optional<PhysRef> {
      if (i == ch.size()) return std::nullopt;
      return ch[i++];
    });
  }
  KWayMerger<Source> merger(std::move(sources));
  std::vector<PhysRef> out;
  out.reserve(total);
  while (auto r = merger.next()) out.push_back(*r);
  return out;
}

}  // namespace dimmtrace
