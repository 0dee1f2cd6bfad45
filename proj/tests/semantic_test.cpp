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
#include "support.hpp"

using namespace dimmtrace;

namespace {

const ConfigSpace kCs{0x7F000000, 0x10000, 64};

PhysRef at(PhysAddr a, Cycle c, Rw rw = Rw::Read) { return {a, rw, c, 0}; }

SemanticEvent ev(EventKind k, Cycle c) {
  SemanticEvent e;
  e.kind = k;
  e.cycle = c;
  return e;
}

}  // namespace

TEST(ClassifyRef, CanonicalSlots) {
  const auto dict = EventDictionary::canonical();
  auto e = classify_ref(at(kCs.base + 0x40, 1), kCs, dict);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, EventKind::EndTracing);

  e = classify_ref(at(kCs.base, 1), kCs, dict);
  EXPECT_EQ(e->kind, EventKind::BeginTracing);
  e = classify_ref(at(kCs.base + 0x80, 1), kCs, dict);
  EXPECT_EQ(e->kind, EventKind::InsertMarker);

  e = classify_ref(at(kCs.base + 0x1000, 1), kCs, dict);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, EventKind::User);
  EXPECT_EQ(e->user_id, 0u);
  e = classify_ref(at(kCs.base + 0x1000 + 5 * 64, 1), kCs, dict);
  EXPECT_EQ(e->user_id, 5u);

  EXPECT_FALSE(classify_ref(at(kCs.base - 0x40, 1), kCs, dict));
  EXPECT_FALSE(classify_ref(at(kCs.base + kCs.size, 1), kCs, dict));
}

TEST(ClassifyRef, UndefinedSlotIsUnknown) {
  EventDictionary closed;
  closed.define(0x40, "END_TRACING");
  closed.define(0x1040, "phase");
  EXPECT_EQ(classify_ref(at(kCs.base + 0xC0, 1), kCs, closed)->kind, EventKind::Unknown);
  EXPECT_EQ(classify_ref(at(kCs.base + 0x1000, 1), kCs, closed)->kind, EventKind::Unknown);
  EXPECT_EQ(classify_ref(at(kCs.base + 0x1040, 1), kCs, closed)->kind, EventKind::User);

  const std::vector<PhysRef> trace{at(kCs.base + 0xC0, 1), at(0x40, 2)};
  const auto o = overlay(trace, kCs, closed);
  EXPECT_EQ(o.events.size(), 1u);
  EXPECT_EQ(o.diagnostics.count(Warning::UnknownSlot), 1u);
}

TEST(ClassifyRef, IndependentOfRwForUserEvents) {
  const auto dict = EventDictionary::canonical();
  for (std::uint64_t id = 0; id < 50; ++id) {
    auto r = classify_ref(at(kCs.user_slot_addr(id), 3, Rw::Read), kCs, dict);
    auto w = classify_ref(at(kCs.user_slot_addr(id), 3, Rw::Write), kCs, dict);
    ASSERT_EQ(r->kind, w->kind);
    ASSERT_EQ(r->user_id, w->user_id);
  }
}

TEST(Overlay, NoEventsAndOnlyEvents) {
  const auto dict = EventDictionary::canonical();
  std::vector<PhysRef> plain{at(0, 1), at(64, 2), at(128, 3)};
  auto o = overlay(plain, kCs, dict);
  EXPECT_TRUE(o.events.empty());
  EXPECT_EQ(o.normal, plain);

  std::vector<PhysRef> only{at(kCs.base, 1), at(kCs.base + 0x40, 2)};
  o = overlay(only, kCs, dict);
  EXPECT_TRUE(o.normal.empty());
  EXPECT_EQ(o.events.size(), 2u);
}

TEST(Overlay, IsAnOrderPreservingPartition) {
  const auto dict = EventDictionary::canonical();
  std::mt19937_64 rng(4);
  std::vector<PhysRef> trace;
  for (Cycle c = 0; c < 20000; ++c) {
    const bool event = rng() % 10 == 0;
    const PhysAddr a = event ? kCs.base + (rng() % (kCs.size / 64)) * 64 : (rng() % (1u << 20)) * 64;
    trace.push_back(at(a, c, (rng() & 1) ? Rw::Write : Rw::Read));
  }
  const auto o = overlay(trace, kCs, dict);
  ASSERT_EQ(o.normal.size() + o.events.size(), trace.size());
  std::size_t n = 0, e = 0;
  for (const auto& r : trace) {
    if (kCs.contains(r.addr)) {
      const auto& got = o.events.at(e++);
      ASSERT_EQ(got.cycle, r.cycle);
      ASSERT_EQ(kCs.base + got.offset, r.addr);
      ASSERT_EQ(got.rw, r.rw);
    } else {
      ASSERT_EQ(o.normal.at(n++), r);
    }
  }
}

TEST(SessionWindows, Examples) {
  std::vector<SemanticEvent> e1{ev(EventKind::BeginTracing, 10), ev(EventKind::EndTracing, 50)};
  auto w = session_windows(e1);
  EXPECT_EQ(w.windows, (std::vector<Window>{{10, 50}}));
  EXPECT_EQ(w.diagnostics.total(), 0u);

  std::vector<SemanticEvent> e2{ev(EventKind::BeginTracing, 10), ev(EventKind::BeginTracing, 20),
                                ev(EventKind::EndTracing, 50)};
  w = session_windows(e2);
  EXPECT_EQ(w.windows, (std::vector<Window>{{10, 50}}));
  EXPECT_EQ(w.diagnostics.count(Warning::NestedBegin), 1u);

  std::vector<SemanticEvent> e3{ev(EventKind::EndTracing, 5)};
  w = session_windows(e3);
  EXPECT_TRUE(w.windows.empty());
  EXPECT_EQ(w.diagnostics.count(Warning::StrayEnd), 1u);

  std::vector<SemanticEvent> e4{ev(EventKind::BeginTracing, 7), ev(EventKind::InsertMarker, 9)};
  w = session_windows(e4);
  EXPECT_EQ(w.windows, (std::vector<Window>{{7, kOpenEnd}}));
}

TEST(WindowSet, Membership) {
  const WindowSet ws({{10, 20}, {30, kOpenEnd}});
  EXPECT_FALSE(ws.contains(9));
  EXPECT_TRUE(ws.contains(10));
  EXPECT_TRUE(ws.contains(19));
  EXPECT_FALSE(ws.contains(20));
  EXPECT_FALSE(ws.contains(29));
  EXPECT_TRUE(ws.contains(Cycle{1} << 40));
  EXPECT_FALSE(WindowSet().contains(0));
  EXPECT_TRUE(WindowSet::everything().contains(0));
}

TEST(EventDictionary, JsonRoundTripAndValidation) {
  auto d = EventDictionary::canonical();
  d.define(0x1000, "phase_a");
  const auto back = EventDictionary::from_json(d.to_json());
  EXPECT_EQ(back.slots(), d.slots());
  EXPECT_TRUE(back.open_user_region());
  EXPECT_EQ(back.name_at(0x40), "END_TRACING");

  EXPECT_THROW(EventDictionary::from_json(nlohmann::json::parse(R"({"0x40": "phase_a"})")), Error);
  EXPECT_THROW(EventDictionary::from_json(nlohmann::json::parse(R"({"zz": "END_TRACING"})")), Error);
  EventDictionary odd;
  odd.define(0x1010, "x");
  EXPECT_THROW(odd.validate(kCs), Error);
}

TEST(ConfigSpace, Validation) {
  EXPECT_NO_THROW(kCs.validate());
  EXPECT_THROW((ConfigSpace{0, 0x1000, 64}.validate()), Error);
  EXPECT_THROW((ConfigSpace{32, 0x2000, 64}.validate()), Error);
}
