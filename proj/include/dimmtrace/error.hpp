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
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dimmtrace {

/// Fatal conditions. Anything listed here aborts the operation that raised it.
enum class ErrorKind {
  InvalidConfig,
  OutOfRangeField,
  AddressOverflow,
  NonMonotonicCycle,
  DurationOverflow,
  TruncatedStream,
  DanglingEscape,
  ReservedEscape,
  BadMagic,
  UnsupportedVersion,
  UnsortedChannel,
  SpecError,
  ParseError,
  IoError,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::OutOfRangeField: return "OutOfRangeField";
    case ErrorKind::AddressOverflow: return "AddressOverflow";
    case ErrorKind::NonMonotonicCycle: return "NonMonotonicCycle";
    case ErrorKind::DurationOverflow: return "DurationOverflow";
    case ErrorKind::TruncatedStream: return "TruncatedStream";
    case ErrorKind::DanglingEscape: return "DanglingEscape";
    case ErrorKind::ReservedEscape: return "ReservedEscape";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::UnsortedChannel: return "UnsortedChannel";
    case ErrorKind::SpecError: return "SpecError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Non-fatal conditions. These are tallied and never stop a stream.
enum class Warning : std::uint8_t {
  UnmatchedColumnCommand,
  ReactivateOpenBank,
  UnknownSlot,
  NestedBegin,
  StrayEnd,
  ConflictingMapping,
  OverlappingDma,
  UnterminatedDma,
  MissingDmaTag,
  kCount,
};

inline std::string_view to_string(Warning w) {
  switch (w) {
    case Warning::UnmatchedColumnCommand: return "UnmatchedColumnCommand";
    case Warning::ReactivateOpenBank: return "ReactivateOpenBank";
    case Warning::UnknownSlot: return "UnknownSlot";
    case Warning::NestedBegin: return "NestedBegin";
    case Warning::StrayEnd: return "StrayEnd";
    case Warning::ConflictingMapping: return "ConflictingMapping";
    case Warning::OverlappingDma: return "OverlappingDma";
    case Warning::UnterminatedDma: return "UnterminatedDma";
    case Warning::MissingDmaTag: return "MissingDmaTag";
    case Warning::kCount: break;
  }
  return "Unknown";
}

/// Per-kind warning counters.
class Diagnostics {
 public:
  static constexpr std::size_t kKinds = static_cast<std::size_t>(Warning::kCount);

  void add(Warning w, std::uint64_t n = 1) { counts_[static_cast<std::size_t>(w)] += n; }
  std::uint64_t count(Warning w) const { return counts_[static_cast<std::size_t>(w)]; }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  void merge(const Diagnostics& other) {
    for (std::size_t i = 0; i < kKinds; ++i) counts_[i] += other.counts_[i];
  }

  template <typename F>
  void for_each_nonzero(F&& f) const {
    for (std::size_t i = 0; i < kKinds; ++i)
      if (counts_[i] != 0) f(static_cast<Warning>(i), counts_[i]);
  }

  bool operator==(const Diagnostics&) const = default;

 private:
  std::array<std::uint64_t, kKinds> counts_{};
};

}  // namespace dimmtrace
