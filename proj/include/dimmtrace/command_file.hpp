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
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dimmtrace/binary_io.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

// .hmtc command file: "HMTC", u16 version, MemConfig, then 16-byte records
// {u64 cycle, u8 kind, u8 bank, u32 row, u16 col}. Little-endian.
inline constexpr std::array<std::uint8_t, 4> kCommandMagic{'H', 'M', 'T', 'C'};
inline constexpr std::uint16_t kCommandFileVersion = 1;
inline constexpr std::size_t kCommandHeaderSize = 4 + 2 + kMemConfigWireSize;
inline constexpr std::size_t kCommandRecordSize = 16;

inline void put_command_header(Bytes& out, const MemConfig& cfg) {
  if (cfg.bank_count > 256) throw Error(ErrorKind::InvalidConfig, "command files hold at most 256 banks");
  out.insert(out.end(), kCommandMagic.begin(), kCommandMagic.end());
  put_le<std::uint16_t>(out, kCommandFileVersion);
  put_mem_config(out, cfg);
}

inline void put_command(Bytes& out, const DdrCommand& c) {
  put_le<std::uint64_t>(out, c.cycle);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(c.kind));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(c.bank));
  put_le<std::uint32_t>(out, c.row);
  put_le<std::uint16_t>(out, c.col);
}

inline DdrCommand parse_command(const std::uint8_t* p) {
  DdrCommand c;
  c.cycle = get_le<std::uint64_t>(p);
  auto kind = p[8];
  c.kind = kind <= 4 ? static_cast<CommandKind>(kind) : CommandKind::Other;
  c.bank = p[9];
  c.row = get_le<std::uint32_t>(p + 10);
  c.col = get_le<std::uint16_t>(p + 14);
  return c;
}

inline MemConfig parse_command_header(std::span<const std::uint8_t> bytes) {
  ByteCursor cur(bytes);
  auto magic = cur.take(4);
  if (!std::equal(magic.begin(), magic.end(), kCommandMagic.begin()))
    throw Error(ErrorKind::BadMagic, "not a command file");
  auto version = cur.read<std::uint16_t>();
  if (version != kCommandFileVersion)
    throw Error(ErrorKind::UnsupportedVersion, "command file version " + std::to_string(version));
  auto cfg = get_mem_config(cur);
  cfg.validate();
  return cfg;
}

inline Bytes encode_command_file(const MemConfig& cfg, std::span<const DdrCommand> cmds) {
  Bytes out;
  out.reserve(kCommandHeaderSize + cmds.size() * kCommandRecordSize);
  put_command_header(out, cfg);
  for (const auto& c : cmds) put_command(out, c);
  return out;
}

struct CommandFile {
  MemConfig config;
  std::vector<DdrCommand> commands;
};

inline CommandFile decode_command_file(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kCommandHeaderSize) throw Error(ErrorKind::TruncatedStream, "short command header");
  CommandFile f;
  f.config = parse_command_header(bytes.first(kCommandHeaderSize));
  auto body = bytes.subspan(kCommandHeaderSize);
  if (body.size() % kCommandRecordSize != 0)
    throw Error(ErrorKind::TruncatedStream, "partial command record");
  f.commands.reserve(body.size() / kCommandRecordSize);
  for (std::size_t i = 0; i < body.size(); i += kCommandRecordSize)
    f.commands.push_back(parse_command(body.data() + i));
  return f;
}

/// Streams commands from a .hmtc file without loading it whole.
class CommandFileReader {
 public:
  explicit CommandFileReader(const std::filesystem::path& path) : file_(path) {
    std::array<std::uint8_t, kCommandHeaderSize> hdr{};
    if (!file_.read_exact(hdr.data(), hdr.size()))
      throw Error(ErrorKind::TruncatedStream, path.string() + ": empty file");
    config_ = parse_command_header(hdr);
  }

  const MemConfig& config() const { return config_; }

  std::optional<DdrCommand> next() {
    std::array<std::uint8_t, kCommandRecordSize> rec{};
    if (!file_.read_exact(rec.data(), rec.size())) return std::nullopt;
    return parse_command(rec.data());
  }

 private:
  BinaryFileReader file_;
  MemConfig config_;
};

}  // namespace dimmtrace
