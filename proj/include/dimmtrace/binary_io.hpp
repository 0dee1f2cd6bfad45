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
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

using Bytes = std::vector<std::uint8_t>;

template <typename T>
inline void put_le(Bytes& out, T v) {
  for (unsigned i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

template <typename T>
inline T get_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < sizeof(T); ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return static_cast<T>(v);
}

/// Bounds-checked little-endian cursor.
class ByteCursor {
 public:
  explicit ByteCursor(std::span<const std::uint8_t> data) : data_(data) {}

  template <typename T>
  T read() {
    need(sizeof(T));
    T v = get_le<T>(data_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorKind::TruncatedStream, "unexpected end of data");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// MemConfig wire form: u32 freq_mhz, u16 bus_width_bits, u16 cacheline_bytes,
// u8 burst_length, u8 tccd, u16 bank_count, u8 row_bits, u8 col_bits.
inline constexpr std::size_t kMemConfigWireSize = 14;

inline void put_mem_config(Bytes& out, const MemConfig& c) {
  put_le<std::uint32_t>(out, c.freq_mhz);
  put_le<std::uint16_t>(out, c.bus_width_bits);
  put_le<std::uint16_t>(out, c.cacheline_bytes);
  put_le<std::uint8_t>(out, c.burst_length);
  put_le<std::uint8_t>(out, c.tccd);
  put_le<std::uint16_t>(out, c.bank_count);
  put_le<std::uint8_t>(out, c.row_bits);
  put_le<std::uint8_t>(out, c.col_bits);
}

inline MemConfig get_mem_config(ByteCursor& in) {
  MemConfig c;
  c.freq_mhz = in.read<std::uint32_t>();
  c.bus_width_bits = in.read<std::uint16_t>();
  c.cacheline_bytes = in.read<std::uint16_t>();
  c.burst_length = in.read<std::uint8_t>();
  c.tccd = in.read<std::uint8_t>();
  c.bank_count = in.read<std::uint16_t>();
  c.row_bits = in.read<std::uint8_t>();
  c.col_bits = in.read<std::uint8_t>();
  return c;
}

/// Buffered binary input that reads fixed-size chunks on demand.
class BinaryFileReader {
 public:
  explicit BinaryFileReader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  }

  /// Reads exactly n bytes or returns false at a clean end of file.
  /// A partial read raises TruncatedStream.
  bool read_exact(std::uint8_t* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    auto got = static_cast<std::size_t>(in_.gcount());
    if (got == n) return true;
    if (got == 0) return false;
    throw Error(ErrorKind::TruncatedStream, path_.string() + ": partial record");
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

/// Writes to `<path>.tmp` and renames into place on commit(). An uncommitted
/// writer removes its temporary file.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(std::filesystem::path path)
      : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorKind::IoError, "cannot create " + tmp_.string());
  }

  AtomicFileWriter(const AtomicFileWriter&) = delete;
  AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

  ~AtomicFileWriter() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void write(std::span<const std::uint8_t> bytes) {
    out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }

  void commit() {
    out_.flush();
    if (!out_) throw Error(ErrorKind::IoError, "write failed for " + path_.string());
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  AtomicFileWriter w(path);
  w.write(bytes);
  w.commit();
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  AtomicFileWriter w(path);
  w.stream() << text;
  w.commit();
}

}  // namespace dimmtrace
