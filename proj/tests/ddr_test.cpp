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

#include <gtest/gtest.h>

#include <random>

#include "dimmtrace/dimmtrace.hpp"
#include "oracles/fifo_ticks.hpp"
#include "support.hpp"

using namespace dimmtrace;

TEST(AddressMapping, ZeroTupleIsZero) {
  const auto m = AddressMapping::canonical(MemConfig{});
  EXPECT_EQ(m.compose(0, 0, 0), 0u);
}

TEST(AddressMapping, RowOneSitsAboveColumnAndLineBits) {
  MemConfig cfg;
  cfg.bank_count = 1;
  const auto m = AddressMapping::canonical(cfg);
  const unsigned burst_bytes_log2 = std::countr_zero(unsigned(cfg.bus_width_bits / 8 * cfg.burst_length));
  EXPECT_EQ(m.compose(1, 0, 0), PhysAddr{1} << (cfg.col_bits + burst_bytes_log2));

  // with banks, the bank field sits between row and col
  const auto m8 = AddressMapping::canonical(MemConfig{});
  EXPECT_EQ(m8.compose(1, 0, 0), PhysAddr{1} << (10 + 3 + 6));
  EXPECT_EQ(m8.compose(0, 1, 0), PhysAddr{1} << (10 + 6));
  EXPECT_EQ(m8.compose(0, 0, 1), PhysAddr{64});
}

TEST(AddressMapping, RoundTripRandomTuples) {
  std::mt19937_64 rng(11);
  for (const char* layout : {"row,bank,col", "bank,row,col", "row,col,bank", "row,channel:1,bank,col"}) {
    MemConfig cfg;
    const auto m = AddressMapping::parse(cfg, layout);
    for (int i = 0; i < 10000; ++i) {
      DramCoord c{static_cast<std::uint32_t>(rng() % (1u << cfg.row_bits)), static_cast<std::uint16_t>(rng() % cfg.bank_count),
                  static_cast<std::uint16_t>(rng() % (1u << cfg.col_bits)),
                  static_cast<ChannelId>(m.channel_bits() ? rng() % 2 : 0)};
      const auto a = m.compose(c);
      ASSERT_EQ(a % cfg.cacheline_bytes, 0u);
      ASSERT_EQ(m.decompose(a), c) << layout;
    }
  }
}

TEST(AddressMapping, OutOfRangeFieldsThrow) {
  const auto m = AddressMapping::canonical(MemConfig{});
  try {
    m.compose(0, 8, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRangeField);
  }
  EXPECT_THROW(m.compose(1u << 13, 0, 0), Error);
  EXPECT_THROW(m.compose(0, 0, 1u << 10), Error);
  EXPECT_THROW(AddressMapping::parse(MemConfig{}, "row,bank"), Error);
  EXPECT_THROW(AddressMapping::parse(MemConfig{}, "row,bank,col,row"), Error);
}

TEST(StateMachine, ActivateThenReadComposesAddress) {
  const MemConfig cfg;
  const auto m = AddressMapping::canonical(cfg);
  BankStates s(cfg.bank_count);
  EXPECT_FALSE(step_state_machine(s, DdrCommand::activate(1, 2, 0x1A3), m).ref);
  const auto r = step_state_machine(s, DdrCommand::read(3, 2, 0x40), m);
  ASSERT_TRUE(r.ref);
  EXPECT_EQ(r.ref->addr, m.compose(0x1A3, 2, 0x40));
  EXPECT_EQ(r.ref->rw, Rw::Read);
  EXPECT_EQ(r.ref->cycle, 3u);
  EXPECT_FALSE(r.warning);

  step_state_machine(s, DdrCommand::precharge(5, 2), m);
  EXPECT_FALSE(s.is_active(2));
}

TEST(StateMachine, ReadOnIdleBankWarns) {
  const MemConfig cfg;
  const auto m = AddressMapping::canonical(cfg);
  BankStates s(cfg.bank_count);
  const auto r = step_state_machine(s, DdrCommand::read(0, 0, 0), m);
  EXPECT_FALSE(r.ref);
  ASSERT_TRUE(r.warning);
  EXPECT_EQ(*r.warning, Warning::UnmatchedColumnCommand);
}

TEST(StateMachine, ReactivateReplacesRowWithWarning) {
  const MemConfig cfg;
  const auto m = AddressMapping::canonical(cfg);
  BankStates s(cfg.bank_count);
  step_state_machine(s, DdrCommand::activate(0, 1, 5), m);
  const auto r = step_state_machine(s, DdrCommand::activate(1, 1, 9), m);
  EXPECT_EQ(r.warning, Warning::ReactivateOpenBank);
  EXPECT_EQ(s.open_row(1), 9u);
  const auto w = step_state_machine(s, DdrCommand::write(2, 1, 3), m);
  ASSERT_TRUE(w.ref);
  EXPECT_EQ(w.ref->addr, m.compose(9, 1, 3));
  EXPECT_EQ(w.ref->rw, Rw::Write);
}

TEST(Decoder, EmptyAndRowOnlyStreams) {
  const MemConfig cfg;
  const auto m = AddressMapping::canonical(cfg);
  auto [refs, st] = decode_command_stream({}, m, cfg);
  EXPECT_TRUE(refs.empty());
  EXPECT_EQ(st, DecodeStats{});

  std::vector<DdrCommand> cmds;
  for (std::uint16_t b = 0; b < 8; ++b) {
    cmds.push_back(DdrCommand::activate(b * 2, b, b));
    cmds.push_back(DdrCommand::precharge(b * 2 + 1, b));
  }
  auto [refs2, st2] = decode_command_stream(cmds, m, cfg);
  EXPECT_TRUE(refs2.empty());
  EXPECT_EQ(st2.activates, 8u);
  EXPECT_EQ(st2.precharges, 8u);
  EXPECT_EQ(st2.warnings.total(), 0u);
}

TEST(Decoder, OneRefPerColumnCommandOnActiveBank) {
  const MemConfig cfg;
  const auto m = AddressMapping::canonical(cfg);
  std::mt19937_64 rng(5);
  std::vector<DdrCommand> cmds;
  std::uint64_t live_columns = 0;
  std::vector<bool> open(cfg.bank_count, false);
  for (Cycle c = 0; c < 5000; ++c) {
    const auto bank = static_cast<std::uint16_t>(rng() % cfg.bank_count);
    switch (rng() % 5) {
      case 0: cmds.push_back(DdrCommand::activate(c, bank, rng() % 100)); open[bank] = true; break;
      case 1: cmds.push_back(DdrCommand::precharge(c, bank)); open[bank] = false; break;
      case 2: cmds.push_back(DdrCommand::read(c, bank, rng() % 1024)); live_columns += open[bank]; break;
      case 3: cmds.push_back(DdrCommand::write(c, bank, rng() % 1024)); live_columns += open[bank]; break;
      default: cmds.push_back(DdrCommand{c, CommandKind::Other, 0, 0, 0}); break;
    }
  }
  auto [refs, st] = decode_command_stream(cmds, m, cfg);
  EXPECT_EQ(refs.size(), live_columns);
  EXPECT_EQ(st.refs, live_columns);
  EXPECT_EQ(st.reads + st.writes - live_columns, st.warnings.count(Warning::UnmatchedColumnCommand));
  EXPECT_EQ(st.commands(), cmds.size());
}

TEST(CommandFile, RoundTripAndErrors) {
  MemConfig cfg;
  std::vector<DdrCommand> cmds{DdrCommand::activate(1, 3, 77), DdrCommand::write(4, 3, 9), DdrCommand::precharge(9, 3)};
  const auto bytes = encode_command_file(cfg, cmds);
  const auto f = decode_command_file(bytes);
  EXPECT_EQ(f.config, cfg);
  EXPECT_EQ(f.commands, cmds);

  auto bad = bytes;
  bad[0] = 'X';
  try {
    decode_command_file(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadMagic);
  }
  auto cut = bytes;
  cut.pop_back();
  EXPECT_THROW(decode_command_file(cut), Error);
}

TEST(Bandwidth, ClosedForms) {
  MemConfig ddr400;
  ddr400.freq_mhz = 400;
  ddr400.bus_width_bits = 128;
  ddr400.cacheline_bytes = 64;
  EXPECT_EQ(peak_trace_bandwidth(ddr400, 40), 4e9);
  EXPECT_EQ(command_frequency(400, 2, 4), 100e6);

  MemConfig ddr200;
  EXPECT_EQ(peak_trace_bandwidth(ddr200, 32), 800e6);
}

TEST(Bandwidth, LinearInWidthAndFrequency) {
  MemConfig cfg;
  const double base = peak_trace_bandwidth(cfg, 32);
  EXPECT_DOUBLE_EQ(peak_trace_bandwidth(cfg, 64), 2 * base);
  cfg.freq_mhz *= 3;
  EXPECT_DOUBLE_EQ(peak_trace_bandwidth(cfg, 32), 3 * base);

  // BL < 2*tCCD leaves the command-rate product unreduced
  MemConfig slow;
  slow.burst_length = 4;
  slow.tccd = 4;
  EXPECT_DOUBLE_EQ(peak_trace_bandwidth(slow, 32), command_frequency(slow) * traces_per_command(slow) * 32);
  EXPECT_LT(peak_trace_bandwidth(slow, 32), 800e6);
}

namespace {

std::vector<PhysRef> every(Cycle spacing, std::size_t n, Cycle start = 0) {
  std::vector<PhysRef> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({0, Rw::Read, start + i * spacing, 0});
  return out;
}

}  // namespace

TEST(Fifo, EmptyTrace) {
  const auto r = simulate_fifo({}, FifoParams{}, MemConfig{});
  EXPECT_EQ(r.max_occupancy, 0u);
  EXPECT_EQ(r.overflow_events, 0u);
}

TEST(Fifo, MatchesTickOracleOnRandomTraces) {
  std::mt19937_64 rng(3);
  const MemConfig cfg;  // 200 MHz
  // link rates chosen so one record takes a whole number of cycles
  for (std::uint64_t link : {800'000'000ull, 1'600'000'000ull, 3'200'000'000ull}) {
    const std::uint64_t service = 32ull * 200'000'000ull / link;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<PhysRef> refs;
      Cycle c = 0;
      for (int i = 0; i < 3000; ++i) {
        c += (rng() % 4 == 0) ? rng() % 40 : rng() % 3;
        refs.push_back({0, Rw::Read, c, 0});
      }
      FifoParams p;
      p.depth = 1 + rng() % 64;
      p.link_bits_per_s = link;
      const auto got = simulate_fifo(refs, p, cfg);
      const auto want = oracle::fifo_ticks(refs, p.depth, 1, service);
      ASSERT_EQ(got.max_occupancy, want.max_occupancy);
      ASSERT_EQ(got.overflow_events, want.overflow_events);
      ASSERT_EQ(got.dropped_records, want.dropped);
      ASSERT_EQ(got.accepted_records, want.accepted);
    }
  }
}

TEST(Fifo, FractionalServiceTimeMatchesOracle) {
  // 1 Gbps at 200 MHz: 6.4 cycles per record, 32 ticks of 1/5 cycle
  std::mt19937_64 rng(8);
  std::vector<PhysRef> refs;
  Cycle c = 0;
  for (int i = 0; i < 20000; ++i) {
    c += rng() % 13;
    refs.push_back({0, Rw::Read, c, 0});
  }
  FifoParams p;
  p.depth = 16;
  const auto got = simulate_fifo(refs, p, MemConfig{});
  const auto want = oracle::fifo_ticks(refs, p.depth, 5, 32);
  EXPECT_EQ(got.max_occupancy, want.max_occupancy);
  EXPECT_EQ(got.dropped_records, want.dropped);
  EXPECT_EQ(got.overflow_events, want.overflow_events);
}

TEST(Fifo, ArrivalsSlowerThanServiceNeverOverflow) {
  FifoParams p;
  p.depth = 1;
  const auto r = simulate_fifo(every(7, 10000), p, MemConfig{});  // 7 >= 6.4 cycles
  EXPECT_EQ(r.overflow_events, 0u);
  EXPECT_EQ(r.max_occupancy, 1u);
}

TEST(Fifo, RejectsBadParams) {
  FifoParams p;
  p.depth = 0;
  EXPECT_THROW(simulate_fifo({}, p, MemConfig{}), Error);
}
