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

#include "dimmtrace/types.hpp"

namespace dimmtrace {

// Trace bandwidth model of a DIMM snooper: one trace per cacheline moved
// by a column command, column commands limited by max(2*tCCD, BL).

/// Maximum column-command rate in commands per second.
inline double command_frequency(std::uint32_t freq_mhz, unsigned tccd, unsigned burst_length) {
  const unsigned spacing = std::max(2 * tccd, burst_length);
  return static_cast<double>(freq_mhz) * 1e6 / static_cast<double>(spacing);
}

inline double command_frequency(const MemConfig& cfg) {
  return command_frequency(cfg.freq_mhz, cfg.tccd, cfg.burst_length);
}

/// Traces produced per column command (data moved per command / line size).
inline double traces_per_command(const MemConfig& cfg) {
  return static_cast<double>(cfg.burst_length) * cfg.bus_width_bits /
         (static_cast<double>(cfg.cacheline_bytes) * 8.0);
}

/// Peak trace bandwidth in bits per second.
inline double peak_trace_bandwidth(const MemConfig& cfg, unsigned trace_bitwidth) {
  if (cfg.burst_length >= 2u * cfg.tccd) {
    const double num = static_cast<double>(cfg.freq_mhz) * 1e6 * cfg.bus_width_bits * trace_bitwidth;
    return num / (static_cast<double>(cfg.cacheline_bytes) * 8.0);
  }
  return command_frequency(cfg) * traces_per_command(cfg) * trace_bitwidth;
}

}  // namespace dimmtrace
