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
#include <string>
#include <utility>
#include <vector>

#include "dimmtrace/binary_io.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

// Packed 32-bit trace word.
//   bit31 = 0 reference: bit30 rw, bits29..4 cacheline index, bits3..0 duration low
//   bit31 = 1 escape:    bits30..28 subtype, bits27..0 payload
// DURATION_HIGH carries duration >> 4 for the reference that follows it.
// CHANNEL_SELECT appears only in merged files and switches the channel of
// all following references.
namespace packed {

inline constexpr std::uint32_t kEscapeBit = 1u << 31;
inline constexpr std::uint32_t kWriteBit = 1u << 30;
inline constexpr unsigned kLineBits = 26;
inline constexpr std::uint64_t kMaxLines = std::uint64_t{1} << kLineBits;
inline constexpr unsigned kDurationLowBits = 4;
inline constexpr std::uint64_t kDurationLowLimit = 1u << kDurationLowBits;
inline constexpr unsigned kPayloadBits = 28;
inline constexpr std::uint32_t kPayloadMask = (1u << kPayloadBits) - 1;
inline constexpr std::uint64_t kMaxDuration = (std::uint64_t{1} << (kPayloadBits + kDurationLowBits)) - 1;

enum class EscapeType : std::uint8_t { DurationHigh = 0, ChannelSelect = 1 };

inline std::uint32_t reference(Rw rw, std::uint64_t line, std::uint32_t duration_low) {
  return (rw == Rw::Write ? kWriteBit : 0u) | (static_cast<std::uint32_t>(line) << kDurationLowBits) |
         (duration_low & 0xFu);
}

inline std::uint32_t escape(EscapeType type, std::uint32_t payload) {
  return kEscapeBit | (static_cast<std::uint32_t>(type) << kPayloadBits) | (payload & kPayloadMask);
}

inline bool is_escape(std::uint32_t w) { return (w & kEscapeBit) != 0; }
inline unsigned escape_subtype(std::uint32_t w) { return (w >> kPayloadBits) & 0x7u; }
inline std::uint32_t escape_payload(std::uint32_t w) { return w & kPayloadMask; }
inline Rw ref_rw(std::uint32_t w) { return (w & kWriteBit) ? Rw::Write : Rw::Read; }
inline std::uint64_t ref_line(std::uint32_t w) { return (w >> kDurationLowBits) & (kMaxLines - 1); }
inline std::uint32_t ref_duration_low(std::uint32_t w) { return w & 0xFu; }

}  // namespace packed

inline constexpr std::array<std::uint8_t, 4> kTraceMagic{'H', 'M', 'T', 'T'};
inline constexpr std::uint16_t kTraceFileVersion = 1;
inline constexpr ChannelId kMergedChannel = 0xFFFF;
inline constexpr std::size_t kTraceHeaderSize = 4 + 2 + 2 + kMemConfigWireSize + 8 + 8 + 8;

struct TraceFileHeader {
  std::uint16_t version = kTraceFileVersion;
  ChannelId channel_id = 0;
  MemConfig config;
  Cycle epoch = 0;
  PhysAddr config_space_base = 0;
  std::uint64_t config_space_size = 0;

  bool merged() const { return channel_id == kMergedChannel; }
  bool operator==(const TraceFileHeader&) const = default;
};

inline void put_trace_header(Bytes& out, const TraceFileHeader& h) {
  if (h.config_space_size % h.config.cacheline_bytes != 0)
    throw Error(ErrorKind::InvalidConfig, "config space size must be a multiple of the cacheline");
  out.insert(out.end(), kTraceMagic.begin(), kTraceMagic.end());
  put_le<std::uint16_t>(out, h.version);
  put_le<std::uint16_t>(out, h.channel_id);
  put_mem_config(out, h.config);
  put_le<std::uint64_t>(out, h.epoch);
  put_le<std::uint64_t>(out, h.config_space_base);
  put_le<std::uint64_t>(out, h.config_space_size);
}

inline TraceFileHeader parse_trace_header(std::span<const std::uint8_t> bytes) {
  ByteCursor cur(bytes);
  auto magic = cur.take(4);
  if (!std::equal(magic.begin(), magic.end(), kTraceMagic.begin()))
    throw Error(ErrorKind::BadMagic, "not a trace file");
  TraceFileHeader h;
  h.version = cur.read<std::uint16_t>();
  if (h.version != kTraceFileVersion)
    throw Error(ErrorKind::UnsupportedVersion, "trace file version " + std::to_string(h.version));
  h.channel_id = cur.read<std::uint16_t>();
  h.config = get_mem_config(cur);
  h.config.validate();
  h.epoch = cur.read<std::uint64_t>();
  h.config_space_base = cur.read<std::uint64_t>();
  h.config_space_size = cur.read<std::uint64_t>();
  return h;
}

/// Incremental encoder. Appends packed words for each reference to `out`.
class TraceEncoder {
 public:
  explicit TraceEncoder(const TraceFileHeader& header)
      : header_(header), prev_(header.epoch), shift_(header.config.line_shift()) {}

  void write_header(Bytes& out) const { put_trace_header(out, header_); }

  void add(const PhysRef& r, Bytes& out) {
    if (r.cycle < prev_)
      throw Error(ErrorKind::NonMonotonicCycle,
                  "cycle " + std::to_string(r.cycle) + " after " + std::to_string(prev_));
    if ((r.addr & ((PhysAddr{1} << shift_) - 1)) != 0)
      throw Error(ErrorKind::AddressOverflow, "unaligned address " + std::to_string(r.addr));
    const std::uint64_t line = r.addr >> shift_;
    if (line >= packed::kMaxLines)
      throw Error(ErrorKind::AddressOverflow, "cacheline index " + std::to_string(line));
    const std::uint64_t duration = r.cycle - prev_;
    if (duration > packed::kMaxDuration)
      throw Error(ErrorKind::DurationOverflow, "gap of " + std::to_string(duration) + " cycles");

    if (header_.merged() && (!channel_ || *channel_ != r.channel)) {
      put_le<std::uint32_t>(out, packed::escape(packed::EscapeType::ChannelSelect, r.channel));
      channel_ = r.channel;
    }
    if (duration >= packed::kDurationLowLimit) {
      put_le<std::uint32_t>(out, packed::escape(packed::EscapeType::DurationHigh,
                                                static_cast<std::uint32_t>(duration >> 4)));
    }
    put_le<std::uint32_t>(out, packed::reference(r.rw, line, static_cast<std::uint32_t>(duration & 0xF)));
    prev_ = r.cycle;
  }

  const TraceFileHeader& header() const { return header_; }

 private:
  TraceFileHeader header_;
  Cycle prev_;
  unsigned shift_;
  std::optional<ChannelId> channel_;
};

/// Incremental decoder over packed words.
class TraceDecoder {
 public:
  explicit TraceDecoder(const TraceFileHeader& header)
      : header_(header), cycle_(header.epoch), shift_(header.config.line_shift()),
        channel_(header.channel_id) {}

  std::optional<PhysRef> feed(std::uint32_t word) {
    if (packed::is_escape(word)) {
      if (pending_high_)
        throw Error(ErrorKind::DanglingEscape, "escape not followed by a reference");
      const auto sub = packed::escape_subtype(word);
      if (sub == static_cast<unsigned>(packed::EscapeType::DurationHigh)) {
        pending_high_ = packed::escape_payload(word);
      } else if (sub == static_cast<unsigned>(packed::EscapeType::ChannelSelect) && header_.merged()) {
        channel_ = static_cast<ChannelId>(packed::escape_payload(word));
      } else {
        throw Error(ErrorKind::ReservedEscape, "escape subtype " + std::to_string(sub));
      }
      return std::nullopt;
    }
    std::uint64_t duration = packed::ref_duration_low(word);
    if (pending_high_) {
      duration |= std::uint64_t{*pending_high_} << packed::kDurationLowBits;
      pending_high_.reset();
    }
    cycle_ += duration;
    return PhysRef{packed::ref_line(word) << shift_, packed::ref_rw(word), cycle_, channel_};
  }

  void finish() const {
    if (pending_high_) throw Error(ErrorKind::DanglingEscape, "stream ends with an escape");
  }

  const TraceFileHeader& header() const { return header_; }

 private:
  TraceFileHeader header_;
  Cycle cycle_;
  unsigned shift_;
  ChannelId channel_;
  std::optional<std::uint32_t> pending_high_;
};

inline Bytes encode_stream(std::span<const PhysRef> refs, const TraceFileHeader& header) {
  TraceEncoder enc(header);
  Bytes out;
  out.reserve(kTraceHeaderSize + refs.size() * 4);
  enc.write_header(out);
  for (const auto& r : refs) enc.add(r, out);
  return out;
}

inline std::pair<std::vector<PhysRef>, TraceFileHeader> decode_stream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4 && !std::equal(kTraceMagic.begin(), kTraceMagic.end(), bytes.begin()))
    throw Error(ErrorKind::BadMagic, "not a trace file");
  if (bytes.size() < kTraceHeaderSize) throw Error(ErrorKind::TruncatedStream, "short trace header");
  auto header = parse_trace_header(bytes.first(kTraceHeaderSize));
  auto body = bytes.subspan(kTraceHeaderSize);
  if (body.size() % 4 != 0) throw Error(ErrorKind::TruncatedStream, "partial trace record");
  TraceDecoder dec(header);
  std::vector<PhysRef> refs;
  refs.reserve(body.size() / 4);
  for (std::size_t i = 0; i < body.size(); i += 4)
    if (auto r = dec.feed(get_le<std::uint32_t>(body.data() + i))) refs.push_back(*r);
  dec.finish();
  return {std::move(refs), header};
}

/// Streams references out of a .hmtt file.
class TraceFileReader {
 public:
  explicit TraceFileReader(const std::filesystem::path& path)
      : file_(path), decoder_(read_header(file_, path)) {}

  const TraceFileHeader& header() const { return decoder_.header(); }

  std::optional<PhysRef> next() {
    std::array<std::uint8_t, 4> w{};
    while (file_.read_exact(w.data(), w.size())) {
      if (auto r = decoder_.feed(get_le<std::uint32_t>(w.data()))) return r;
    }
    decoder_.finish();
    return std::nullopt;
  }

 private:
  static TraceFileHeader read_header(BinaryFileReader& f, const std::filesystem::path& path) {
    std::array<std::uint8_t, kTraceHeaderSize> hdr{};
    if (!f.read_exact(hdr.data(), hdr.size()))
      throw Error(ErrorKind::TruncatedStream, path.string() + ": empty file");
    return parse_trace_header(hdr);
  }

  BinaryFileReader file_;
  TraceDecoder decoder_;
};

/// Streams references into a .hmtt file, flushing in chunks.
class TraceFileWriter {
 public:
  TraceFileWriter(const std::filesystem::path& path, const TraceFileHeader& header)
      : out_(path), encoder_(header) {
    encoder_.write_header(buf_);
  }

  void add(const PhysRef& r) {
    encoder_.add(r, buf_);
    if (buf_.size() >= (1u << 20)) flush();
  }

  void commit() {
    flush();
    out_.commit();
  }

 private:
  void flush() {
    out_.write(buf_);
    buf_.clear();
  }

  AtomicFileWriter out_;
  TraceEncoder encoder_;
  Bytes buf_;
};

}  // namespace dimmtrace
