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
#include <bit>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

enum class AddressField : std::uint8_t { Row, Bank, Col, Channel };

/// DRAM coordinates of one cacheline.
struct DramCoord {
  std::uint32_t row = 0;
  std::uint16_t bank = 0;
  std::uint16_t col = 0;
  ChannelId channel = 0;

  bool operator==(const DramCoord&) const = default;
};

/// How {row, bank, col, channel} bits compose a physical address.
///
/// Fields are listed most significant first and sit above the cacheline
/// offset bits, so one column command always names exactly one cacheline.
/// The default layout is row | bank | col with no channel bits.
class AddressMapping {
 public:
  struct Field {
    AddressField kind;
    unsigned width;
  };

  AddressMapping() = default;

  AddressMapping(const MemConfig& cfg, std::vector<AddressField> order, unsigned channel_bits = 0)
      : offset_bits_(cfg.line_shift()), bank_count_(cfg.bank_count) {
    cfg.validate();
    bool seen[4] = {};
    for (auto f : order) {
      auto i = static_cast<unsigned>(f);
      if (seen[i]) throw Error(ErrorKind::InvalidConfig, "address field listed twice");
      seen[i] = true;
    }
    if (!seen[0] || !seen[1] || !seen[2])
      throw Error(ErrorKind::InvalidConfig, "mapping needs row, bank and col fields");
    if (seen[3] != (channel_bits > 0))
      throw Error(ErrorKind::InvalidConfig, "channel field requires channel_bits > 0");
    for (auto f : order) {
      unsigned w = 0;
      switch (f) {
        case AddressField::Row: w = cfg.row_bits; break;
        case AddressField::Bank: w = bank_bits_for(cfg.bank_count); break;
        case AddressField::Col: w = cfg.col_bits; break;
        case AddressField::Channel: w = channel_bits; break;
      }
      fields_.push_back({f, w});
    }
    row_bits_ = cfg.row_bits;
    col_bits_ = cfg.col_bits;
    channel_bits_ = channel_bits;
    if (address_bits() > 63) throw Error(ErrorKind::InvalidConfig, "address wider than 63 bits");
  }

  static AddressMapping canonical(const MemConfig& cfg) {
    return AddressMapping(cfg, {AddressField::Row, AddressField::Bank, AddressField::Col});
  }

  /// Parses "row,bank,col" style layouts; "channel:N" adds N channel bits.
  static AddressMapping parse(const MemConfig& cfg, const std::string& text) {
    std::vector<AddressField> order;
    unsigned channel_bits = 0;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "row") order.push_back(AddressField::Row);
      else if (tok == "bank") order.push_back(AddressField::Bank);
      else if (tok == "col") order.push_back(AddressField::Col);
      else if (tok.rfind("channel:", 0) == 0) {
        order.push_back(AddressField::Channel);
        channel_bits = static_cast<unsigned>(std::stoul(tok.substr(8)));
      } else {
        throw Error(ErrorKind::InvalidConfig, "unknown mapping field '" + tok + "'");
      }
    }
    return AddressMapping(cfg, std::move(order), channel_bits);
  }

  std::string to_string() const {
    std::string out;
    for (const auto& f : fields_) {
      if (!out.empty()) out += ',';
      switch (f.kind) {
        case AddressField::Row: out += "row"; break;
        case AddressField::Bank: out += "bank"; break;
        case AddressField::Col: out += "col"; break;
        case AddressField::Channel: out += "channel:" + std::to_string(f.width); break;
      }
    }
    return out;
  }

  static unsigned bank_bits_for(std::uint32_t bank_count) {
    return bank_count <= 1 ? 0u : static_cast<unsigned>(std::bit_width(bank_count - 1u));
  }

  unsigned offset_bits() const { return offset_bits_; }
  unsigned channel_bits() const { return channel_bits_; }
  unsigned address_bits() const {
    unsigned total = offset_bits_;
    for (const auto& f : fields_) total += f.width;
    return total;
  }
  const std::vector<Field>& fields() const { return fields_; }

  PhysAddr compose(const DramCoord& c) const {
    check_range(c);
    PhysAddr addr = 0;
    for (const auto& f : fields_) {
      addr = (addr << f.width) | value_of(c, f.kind);
    }
    return addr << offset_bits_;
  }

  PhysAddr compose(std::uint32_t row, std::uint16_t bank, std::uint16_t col,
                   ChannelId channel = 0) const {
    return compose(DramCoord{row, bank, col, channel});
  }

  /// Inverse of compose. Offset bits below the cacheline are discarded.
  DramCoord decompose(PhysAddr addr) const {
    if (address_bits() < 64 && (addr >> address_bits()) != 0)
      throw Error(ErrorKind::OutOfRangeField, "address beyond mapped space");
    DramCoord c;
    PhysAddr rest = addr >> offset_bits_;
    for (auto it = fields_.rbegin(); it != fields_.rend(); ++it) {
      std::uint64_t v = it->width == 0 ? 0 : (rest & ((std::uint64_t{1} << it->width) - 1));
      rest = it->width == 0 ? rest : rest >> it->width;
      switch (it->kind) {
        case AddressField::Row: c.row = static_cast<std::uint32_t>(v); break;
        case AddressField::Bank: c.bank = static_cast<std::uint16_t>(v); break;
        case AddressField::Col: c.col = static_cast<std::uint16_t>(v); break;
        case AddressField::Channel: c.channel = static_cast<ChannelId>(v); break;
      }
    }
    return c;
  }

  bool operator==(const AddressMapping& o) const {
    if (offset_bits_ != o.offset_bits_ || bank_count_ != o.bank_count_ ||
        fields_.size() != o.fields_.size())
      return false;
    for (std::size_t i = 0; i < fields_.size(); ++i)
      if (fields_[i].kind != o.fields_[i].kind || fields_[i].width != o.fields_[i].width)
        return false;
    return true;
  }

 private:
  static std::uint64_t value_of(const DramCoord& c, AddressField f) {
    switch (f) {
      case AddressField::Row: return c.row;
      case AddressField::Bank: return c.bank;
      case AddressField::Col: return c.col;
      case AddressField::Channel: return c.channel;
    }
    return 0;
  }

  void check_range(const DramCoord& c) const {
    if (row_bits_ < 32 && (std::uint64_t{c.row} >> row_bits_) != 0)
      throw Error(ErrorKind::OutOfRangeField, "row " + std::to_string(c.row));
    if (c.bank >= bank_count_)
      throw Error(ErrorKind::OutOfRangeField, "bank " + std::to_string(c.bank));
    if ((std::uint64_t{c.col} >> col_bits_) != 0)
      throw Error(ErrorKind::OutOfRangeField, "col " + std::to_string(c.col));
    if ((std::uint64_t{c.channel} >> channel_bits_) != 0)
      throw Error(ErrorKind::OutOfRangeField, "channel " + std::to_string(c.channel));
  }

  std::vector<Field> fields_;
  unsigned offset_bits_ = 6;
  std::uint32_t bank_count_ = 1;
  unsigned row_bits_ = 0;
  unsigned col_bits_ = 0;
  unsigned channel_bits_ = 0;
};

}  // namespace dimmtrace
