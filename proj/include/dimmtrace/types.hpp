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

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "dimmtrace/error.hpp"

namespace dimmtrace {

using Cycle = std::uint64_t;
using PhysAddr = std::uint64_t;
using ChannelId = std::uint16_t;

/// Geometry and timing of the traced memory system.
struct MemConfig {
  std::uint32_t freq_mhz = 200;
  std::uint16_t bus_width_bits = 64;
  std::uint16_t cacheline_bytes = 64;
  std::uint8_t burst_length = 8;
  std::uint8_t tccd = 2;
  std::uint16_t bank_count = 8;
  std::uint8_t row_bits = 13;
  std::uint8_t col_bits = 10;

  void validate() const {
    if (freq_mhz == 0) throw Error(ErrorKind::InvalidConfig, "freq_mhz must be > 0");
    if (bus_width_bits != 64 && bus_width_bits != 128)
      throw Error(ErrorKind::InvalidConfig, "bus_width_bits must be 64 or 128");
    if (cacheline_bytes < 64 || !std::has_single_bit(cacheline_bytes))
      throw Error(ErrorKind::InvalidConfig, "cacheline_bytes must be a power of two >= 64");
    if (burst_length != 4 && burst_length != 8)
      throw Error(ErrorKind::InvalidConfig, "burst_length must be 4 or 8");
    if (bank_count == 0 || row_bits == 0 || col_bits == 0)
      throw Error(ErrorKind::InvalidConfig, "bank_count, row_bits and col_bits must be > 0");
    if (row_bits > 32 || col_bits > 16)
      throw Error(ErrorKind::InvalidConfig, "row_bits <= 32 and col_bits <= 16 required");
  }

  unsigned line_shift() const { return static_cast<unsigned>(std::countr_zero(cacheline_bytes)); }
  double freq_hz() const { return static_cast<double>(freq_mhz) * 1e6; }

  bool operator==(const MemConfig&) const = default;
};

enum class Rw : std::uint8_t { Read = 0, Write = 1 };

inline std::string_view to_string(Rw rw) { return rw == Rw::Read ? "R" : "W"; }

/// A decoded physical memory reference. `addr` is cacheline aligned.
struct PhysRef {
  PhysAddr addr = 0;
  Rw rw = Rw::Read;
  Cycle cycle = 0;
  ChannelId channel = 0;

  bool operator==(const PhysRef&) const = default;
};

enum class CommandKind : std::uint8_t {
  Activate = 0,
  Read = 1,
  Write = 2,
  Precharge = 3,
  Other = 4,
};

inline std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::Activate: return "ACTIVATE";
    case CommandKind::Read: return "READ";
    case CommandKind::Write: return "WRITE";
    case CommandKind::Precharge: return "PRECHARGE";
    case CommandKind::Other: return "OTHER";
  }
  return "?";
}

struct DdrCommand {
  Cycle cycle = 0;
  CommandKind kind = CommandKind::Other;
  std::uint16_t bank = 0;
  std::uint32_t row = 0;
  std::uint16_t col = 0;

  static DdrCommand activate(Cycle c, std::uint16_t bank, std::uint32_t row) {
    return {c, CommandKind::Activate, bank, row, 0};
  }
  static DdrCommand read(Cycle c, std::uint16_t bank, std::uint16_t col) {
    return {c, CommandKind::Read, bank, 0, col};
  }
  static DdrCommand write(Cycle c, std::uint16_t bank, std::uint16_t col) {
    return {c, CommandKind::Write, bank, 0, col};
  }
  static DdrCommand precharge(Cycle c, std::uint16_t bank) {
    return {c, CommandKind::Precharge, bank, 0, 0};
  }

  bool operator==(const DdrCommand&) const = default;
};

}  // namespace dimmtrace
