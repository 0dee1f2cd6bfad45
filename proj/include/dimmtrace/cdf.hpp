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
#include <vector>

namespace dimmtrace {

struct CdfPoint {
  double x = 0;
  double cumulative = 0;
  bool operator==(const CdfPoint&) const = default;
};

/// Step CDF with one point per distinct value.
template <typename Key>
std::vector<CdfPoint> make_cdf(const std::map<Key, std::uint64_t>& weights) {
  std::uint64_t total = 0;
  for (const auto& [k, w] : weights) total += w;
  std::vector<CdfPoint> out;
  if (total == 0) return out;
  std::uint64_t acc = 0;
  for (const auto& [k, w] : weights) {
    acc += w;
    out.push_back({static_cast<double>(k), static_cast<double>(acc) / static_cast<double>(total)});
  }
  return out;
}

/// Fraction of weight at or below x.
inline double cdf_at(const std::vector<CdfPoint>& cdf, double x) {
  double f = 0;
  for (const auto& p : cdf) {
    if (p.x > x) break;
    f = p.cumulative;
  }
  return f;
}

}  // namespace dimmtrace
