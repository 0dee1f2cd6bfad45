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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dimmtrace/address_mapping.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

/// Per-bank state of the reduced DDR state machine: a bank is either idle
/// or has exactly one open row.
class BankStates {
 public:
  explicit BankStates(std::size_t bank_count = 0) : open_rows_(bank_count) {}

  bool is_active(std::uint16_t bank) const { return open_rows_.at(bank).has_value(); }
  std::optional<std::uint32_t> open_row(std::uint16_t bank) const { return open_rows_.at(bank); }
  std::size_t bank_count() const { return open_rows_.size(); }

  void activate(std::uint16_t bank, std::uint32_t row) { open_rows_.at(bank) = row; }
  void precharge(std::uint16_t bank) { open_rows_.at(bank).reset(); }

  bool operator==(const BankStates&) const = default;

 private:
  std::vector<std::optional<std::uint32_t>> open_rows_;
};

struct StepResult {
  std::optional<PhysRef> ref;
  std::optional<Warning> warning;
};

/// Advances the state machine by one command.
///
/// ACTIVATE opens a row, READ/WRITE on an open bank yields one reference,
/// PRECHARGE closes the bank, OTHER is ignored. A column command on an idle
/// bank yields a warning and no reference. A second ACTIVATE on an open bank
/// replaces the row (implicit precharge) and also warns.
inline StepResult step_state_machine(BankStates& states, const DdrCommand& cmd,
                                     const AddressMapping& mapping, ChannelId channel = 0) {
  if (cmd.kind != CommandKind::Other && cmd.bank >= states.bank_count())
    throw Error(ErrorKind::OutOfRangeField, "bank " + std::to_string(cmd.bank));
  StepResult out;
  switch (cmd.kind) {
    case CommandKind::Activate:
      if (states.is_active(cmd.bank)) out.warning = Warning::ReactivateOpenBank;
      states.activate(cmd.bank, cmd.row);
      break;
    case CommandKind::Read:
    case CommandKind::Write: {
      auto row = states.open_row(cmd.bank);
      if (!row) {
        out.warning = Warning::UnmatchedColumnCommand;
        break;
      }
      out.ref = PhysRef{mapping.compose(*row, cmd.bank, cmd.col, channel),
                        cmd.kind == CommandKind::Read ? Rw::Read : Rw::Write, cmd.cycle, channel};
      break;
    }
    case CommandKind::Precharge:
      states.precharge(cmd.bank);
      break;
    case CommandKind::Other:
      break;
  }
  return out;
}

struct DecodeStats {
  std::uint64_t activates = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t precharges = 0;
  std::uint64_t others = 0;
  std::uint64_t refs = 0;
  Diagnostics warnings;

  std::uint64_t commands() const { return activates + reads + writes + precharges + others; }
  bool operator==(const DecodeStats&) const = default;
};

/// Stateful single-channel decoder; feed commands in cycle order.
class CommandDecoder {
 public:
  CommandDecoder(const AddressMapping& mapping, const MemConfig& cfg, ChannelId channel = 0)
      : mapping_(mapping), states_(cfg.bank_count), channel_(channel) {}

  std::optional<PhysRef> feed(const DdrCommand& cmd) {
    switch (cmd.kind) {
      case CommandKind::Activate: ++stats_.activates; break;
      case CommandKind::Read: ++stats_.reads; break;
      case CommandKind::Write: ++stats_.writes; break;
      case CommandKind::Precharge: ++stats_.precharges; break;
      case CommandKind::Other: ++stats_.others; break;
    }
    auto r = step_state_machine(states_, cmd, mapping_, channel_);
    if (r.warning) stats_.warnings.add(*r.warning);
    if (r.ref) ++stats_.refs;
    return r.ref;
  }

  const DecodeStats& stats() const { return stats_; }
  const BankStates& states() const { return states_; }

 private:
  AddressMapping mapping_;
  BankStates states_;
  ChannelId channel_;
  DecodeStats stats_;
};

inline std::pair<std::vector<PhysRef>, DecodeStats> decode_command_stream(
    std::span<const DdrCommand> cmds, const AddressMapping& mapping, const MemConfig& cfg,
    ChannelId channel = 0) {
  CommandDecoder dec(mapping, cfg, channel);
  std::vector<PhysRef> refs;
  refs.reserve(cmds.size() / 2);
  for (const auto& c : cmds)
    if (auto r = dec.feed(c)) refs.push_back(*r);
  return {std::move(refs), dec.stats()};
}

}  // namespace dimmtrace
