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
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dimmtrace/error.hpp"
#include "dimmtrace/types.hpp"

namespace dimmtrace {

inline constexpr std::uint64_t kUserRegionOffset = 0x1000;

/// Reserved physical window whose references are commands to the tracer.
struct ConfigSpace {
  PhysAddr base = 0;
  std::uint64_t size = 0;
  std::uint64_t stride = 64;

  void validate() const {
    if (stride == 0) throw Error(ErrorKind::InvalidConfig, "config space stride must be > 0");
    if (base % stride != 0) throw Error(ErrorKind::InvalidConfig, "config space base must be stride aligned");
    if (size < kUserRegionOffset + stride || size % stride != 0)
      throw Error(ErrorKind::InvalidConfig, "config space must hold the inner region and one user slot");
  }

  bool contains(PhysAddr a) const { return a >= base && a - base < size; }
  std::uint64_t user_slots() const { return (size - kUserRegionOffset) / stride; }
  PhysAddr user_slot_addr(std::uint64_t id) const { return base + kUserRegionOffset + id * stride; }
  bool operator==(const ConfigSpace&) const = default;
};

enum class EventKind : std::uint8_t { BeginTracing, EndTracing, InsertMarker, User, Unknown };

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::BeginTracing: return "BEGIN_TRACING";
    case EventKind::EndTracing: return "END_TRACING";
    case EventKind::InsertMarker: return "INSERT_MARKER";
    case EventKind::User: return "USER";
    case EventKind::Unknown: return "UNKNOWN";
  }
  return "?";
}

inline std::optional<EventKind> inner_command_from_name(const std::string& name) {
  if (name == "BEGIN_TRACING") return EventKind::BeginTracing;
  if (name == "END_TRACING" || name == "STOP_TRACING") return EventKind::EndTracing;
  if (name == "INSERT_MARKER" || name == "INSERT_ONE_SPECIFIC_TRACE") return EventKind::InsertMarker;
  return std::nullopt;
}

struct SemanticEvent {
  EventKind kind = EventKind::Unknown;
  std::uint64_t user_id = 0;  // meaningful for User only
  std::uint64_t offset = 0;
  Cycle cycle = 0;
  ChannelId channel = 0;
  Rw rw = Rw::Read;

  bool operator==(const SemanticEvent&) const = default;
};

/// Slot offset → meaning. Inner commands live in [0, 0x1000); user events
/// from 0x1000 upward. An open user region accepts every user slot.
class EventDictionary {
 public:
  static constexpr std::uint64_t kBeginOffset = 0x00;
  static constexpr std::uint64_t kEndOffset = 0x40;
  static constexpr std::uint64_t kMarkerOffset = 0x80;

  static EventDictionary canonical() {
    EventDictionary d;
    d.define(kBeginOffset, "BEGIN_TRACING");
    d.define(kEndOffset, "END_TRACING");
    d.define(kMarkerOffset, "INSERT_MARKER");
    d.open_user_region_ = true;
    return d;
  }

  /// Reads {"0x40": "END_TRACING", "0x1000": "phase_a", ...}; the optional
  /// key "user_region": "open" accepts undeclared user slots.
  static EventDictionary from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::ParseError, "event dictionary must be a JSON object");
    EventDictionary d;
    for (const auto& [key, value] : j.items()) {
      if (!value.is_string()) throw Error(ErrorKind::ParseError, "dictionary value for " + key + " is not a string");
      if (key == "user_region") {
        d.open_user_region_ = value.get<std::string>() == "open";
        continue;
      }
      std::uint64_t off = 0;
      try {
        std::size_t used = 0;
        off = std::stoull(key, &used, 0);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "bad dictionary offset '" + key + "'");
      }
      d.define(off, value.get<std::string>());
    }
    return d;
  }

  nlohmann::json to_json() const {
    nlohmann::ordered_json j;
    for (const auto& [off, name] : slots_) j[hex(off)] = name;
    if (open_user_region_) j["user_region"] = "open";
    return j;
  }

  void define(std::uint64_t offset, const std::string& name) {
    if (offset < kUserRegionOffset && !inner_command_from_name(name))
      throw Error(ErrorKind::ParseError, "inner-region slot " + hex(offset) + " must name an inner command, got " + name);
    slots_[offset] = name;
  }

  void set_open_user_region(bool open) { open_user_region_ = open; }
  bool open_user_region() const { return open_user_region_; }

  std::optional<std::string> name_at(std::uint64_t offset) const {
    auto it = slots_.find(offset);
    if (it == slots_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::uint64_t, std::string>& slots() const { return slots_; }

  void validate(const ConfigSpace& cs) const {
    for (const auto& [off, name] : slots_) {
      if (off % cs.stride != 0) throw Error(ErrorKind::InvalidConfig, "slot " + hex(off) + " not stride aligned");
      if (off >= cs.size) throw Error(ErrorKind::InvalidConfig, "slot " + hex(off) + " outside config space");
    }
  }

  static std::string hex(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
  }

 private:
  std::map<std::uint64_t, std::string> slots_;
  bool open_user_region_ = false;
};

/// nullopt means a normal reference. Unknown-kind events are in-space
/// references to undefined slots.
inline std::optional<SemanticEvent> classify_ref(const PhysRef& ref, const ConfigSpace& cs,
                                                 const EventDictionary& dict) {
  if (!cs.contains(ref.addr)) return std::nullopt;
  SemanticEvent ev;
  ev.offset = ref.addr - cs.base;
  ev.cycle = ref.cycle;
  ev.channel = ref.channel;
  ev.rw = ref.rw;
  const bool aligned = ev.offset % cs.stride == 0;
  if (ev.offset < kUserRegionOffset) {
    auto name = aligned ? dict.name_at(ev.offset) : std::nullopt;
    ev.kind = name ? *inner_command_from_name(*name) : EventKind::Unknown;
    return ev;
  }
  if (aligned && (dict.open_user_region() || dict.name_at(ev.offset))) {
    ev.kind = EventKind::User;
    ev.user_id = (ev.offset - kUserRegionOffset) / cs.stride;
  } else {
    ev.kind = EventKind::Unknown;
  }
  return ev;
}

struct OverlayResult {
  std::vector<PhysRef> normal;
  std::vector<SemanticEvent> events;
  Diagnostics diagnostics;
};

inline OverlayResult overlay(std::span<const PhysRef> trace, const ConfigSpace& cs, const EventDictionary& dict) {
  OverlayResult out;
  for (const auto& r : trace) {
    if (auto ev = classify_ref(r, cs, dict)) {
      if (ev->kind == EventKind::Unknown) out.diagnostics.add(Warning::UnknownSlot);
      out.events.push_back(*ev);
    } else {
      out.normal.push_back(r);
    }
  }
  return out;
}

inline constexpr Cycle kOpenEnd = std::numeric_limits<Cycle>::max();

/// Half-open [begin, end) tracing window; end == kOpenEnd when never closed.
struct Window {
  Cycle begin = 0;
  Cycle end = kOpenEnd;
  bool operator==(const Window&) const = default;
};

struct WindowResult {
  std::vector<Window> windows;
  Diagnostics diagnostics;
};

/// Pairs BEGIN/END events. Nested BEGINs collapse into the outermost
/// window; an END with no open window is ignored.
inline WindowResult session_windows(std::span<const SemanticEvent> events) {
  WindowResult out;
  bool open = false;
  Cycle begin = 0;
  for (const auto& e : events) {
    if (e.kind == EventKind::BeginTracing) {
      if (open) {
        out.diagnostics.add(Warning::NestedBegin);
      } else {
        open = true;
        begin = e.cycle;
      }
    } else if (e.kind == EventKind::EndTracing) {
      if (!open) {
        out.diagnostics.add(Warning::StrayEnd);
        continue;
      }
      out.windows.push_back({begin, e.cycle});
      open = false;
    }
  }
  if (open) out.windows.push_back({begin, kOpenEnd});
  return out;
}

/// Membership test over sorted, disjoint windows.
class WindowSet {
 public:
  WindowSet() = default;
  explicit WindowSet(std::vector<Window> w) : windows_(std::move(w)) {}

  /// A set that admits every cycle.
  static WindowSet everything() { return WindowSet({Window{0, kOpenEnd}}); }

  bool contains(Cycle c) const {
    auto it = std::upper_bound(windows_.begin(), windows_.end(), c,
                               [](Cycle v, const Window& w) { return v < w.begin; });
    if (it == windows_.begin()) return false;
    --it;
    return c < it->end;
  }

  const std::vector<Window>& windows() const { return windows_; }

 private:
  std::vector<Window> windows_;
};

}  // namespace dimmtrace
