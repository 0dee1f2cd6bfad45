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

#include <fstream>
#include <random>

#include "dimmtrace/dimmtrace.hpp"
#include "support.hpp"

using namespace dimmtrace;
using testing_support::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::IoError;
}

}  // namespace

TEST(RefsCsv, RoundTrip) {
  TempDir t("refs");
  std::mt19937_64 rng(1);
  auto refs = testing_support::random_refs(rng, 5000, 3, 100);
  refs.push_back({(std::uint64_t{1} << 32) - 64, Rw::Write, std::uint64_t{1} << 50, kMergedChannel});
  write_refs_file(t / "a.refs", refs);
  EXPECT_EQ(read_refs_file(t / "a.refs"), refs);
}

TEST(RefsCsv, Errors) {
  TempDir t("refs-bad");
  EXPECT_EQ(kind_of([&] { read_refs_file(t / "missing.refs"); }), ErrorKind::IoError);
  write_text(t / "nohdr.refs", "cycle,channel,addr,rw\n1,0,0x40,R\n");
  EXPECT_EQ(kind_of([&] { read_refs_file(t / "nohdr.refs"); }), ErrorKind::ParseError);
  write_text(t / "short.refs", "# dimmtrace-refs v1\ncycle,channel,addr,rw\n1,0,0x40\n");
  EXPECT_EQ(kind_of([&] { read_refs_file(t / "short.refs"); }), ErrorKind::ParseError);
  write_text(t / "rw.refs", "# dimmtrace-refs v1\ncycle,channel,addr,rw\n1,0,0x40,X\n");
  EXPECT_EQ(kind_of([&] { read_refs_file(t / "rw.refs"); }), ErrorKind::ParseError);
  write_text(t / "num.refs", "# dimmtrace-refs v1\ncycle,channel,addr,rw\n1x,0,0x40,R\n");
  EXPECT_EQ(kind_of([&] { read_refs_file(t / "num.refs"); }), ErrorKind::ParseError);
}

TEST(EventsCsv, RoundTrip) {
  TempDir t("ev");
  std::vector<SemanticEvent> evs = {
      {EventKind::BeginTracing, 0, 0x0, 10, 0, Rw::Read},
      {EventKind::User, 3, 0x10c0, 20, 1, Rw::Write},
      {EventKind::Unknown, 0, 0x880, 30, 0, Rw::Read},
      {EventKind::EndTracing, 0, 0x40, 40, 0, Rw::Read},
  };
  write_events_file(t / "e.csv", evs);
  EXPECT_EQ(read_events_file(t / "e.csv"), evs);
  write_text(t / "bad.csv", "# dimmtrace-events v1\ncycle,channel,kind,offset,user_id,rw\n1,0,NOPE,0x0,0,R\n");
  EXPECT_EQ(kind_of([&] { read_events_file(t / "bad.csv"); }), ErrorKind::ParseError);
}

TEST(VirtualCsv, RoundTrip) {
  TempDir t("virt");
  std::vector<VirtualRef> refs = {{7, 0x80040, Rw::Read, 5}, {0, 0, Rw::Write, 6}, {123456, 0x7fff'ffff'f000, Rw::Read, 9}};
  {
    std::ofstream os(t / "v.csv");
    write_virtual(os, refs);
  }
  EXPECT_EQ(read_virtual_file(t / "v.csv"), refs);
}

TEST(LabeledCsv, Layout) {
  std::vector<LabeledRef> refs(2);
  refs[0].ref = {0x40, Rw::Read, 3, 0};
  refs[0].label = RefLabel::DmaRead;
  refs[0].in_window = true;
  refs[0].dma_id = 4;
  refs[1].ref = {0x80, Rw::Write, 4, 1};
  refs[1].label = RefLabel::CpuWrite;
  refs[1].in_window = false;
  std::ostringstream os;
  write_labeled(os, refs);
  EXPECT_EQ(os.str(), "# dimmtrace-labeled v1\ncycle,channel,addr,rw,label,in_window,dma_id\n"
                      "3,0,0x40,R," + to_string(RefLabel::DmaRead) + ",1,4\n"
                      "4,1,0x80,W," + to_string(RefLabel::CpuWrite) + ",0,\n");
}

TEST(PageJournal, RoundTrip) {
  TempDir t("pages");
  PageJournal j;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i)
    j.maps.push_back({static_cast<Cycle>(i * 10), static_cast<Pid>(rng() % 5), rng() % 100000, rng() % 100000, rng()});
  j.unmaps.push_back({9999, 17});
  write_page_journal(t / "p.jsonl", j);
  const auto back = read_page_journal(t / "p.jsonl");
  EXPECT_EQ(back.maps, j.maps);
  EXPECT_EQ(back.unmaps, j.unmaps);

  write_text(t / "bad.jsonl", "{\"cycle\": 1, \"virt_page\": 2, \"phys_page\": 3, \"pte_addr\": 0}\n");
  EXPECT_EQ(kind_of([&] { read_page_journal(t / "bad.jsonl"); }), ErrorKind::ParseError);
  write_text(t / "junk.jsonl", "{not json\n");
  EXPECT_EQ(kind_of([&] { read_page_journal(t / "junk.jsonl"); }), ErrorKind::ParseError);
}

TEST(DmaJournal, RoundTrip) {
  TempDir t("dma");
  std::vector<DmaRequest> reqs = {{0, DmaOwner::Disk, DmaDir::Read, 0x10000000, 131072, 100, 900},
                                  {1, DmaOwner::Disk, DmaDir::Write, 0x18000000, 4096, 1000, 1200}};
  write_dma_journal(t / "d.jsonl", reqs);
  EXPECT_EQ(read_dma_journal(t / "d.jsonl"), reqs);
  write_text(t / "bad.jsonl",
             "{\"id\": 0, \"owner\": \"toaster\", \"dir\": \"read\", \"buf_start\": 0, \"buf_size\": 64, "
             "\"cycle_begin\": 0, \"cycle_end\": 1}\n");
  EXPECT_EQ(kind_of([&] { read_dma_journal(t / "bad.jsonl"); }), ErrorKind::ParseError);
}

TEST(Platform, JsonRoundTrip) {
  Platform p;
  p.mem.freq_mhz = 400;
  p.channels = 2;
  p.mapping = "row,bank,col,channel:1";
  p.config_space = {0xff800000, 8u << 20, 64};
  p.page_size = 8192;
  EXPECT_EQ(platform_from_json(nlohmann::json::parse(platform_to_json(p).dump())), p);
  EXPECT_EQ(kind_of([] { platform_from_json(nlohmann::json::parse(R"({"channels": 1})")); }), ErrorKind::ParseError);
}

TEST(JsonFile, Errors) {
  TempDir t("json");
  EXPECT_EQ(kind_of([&] { read_json_file(t / "none.json"); }), ErrorKind::IoError);
  write_text(t / "bad.json", "{\"a\": ");
  EXPECT_EQ(kind_of([&] { read_json_file(t / "bad.json"); }), ErrorKind::ParseError);
}

TEST(AtomicWrite, NoPartialFileOnAbandon) {
  TempDir t("atomic");
  {
    AtomicFileWriter w(t / "x.bin");
    w.stream() << "partial";
  }
  EXPECT_FALSE(std::filesystem::exists(t / "x.bin"));
  const Bytes b = {1, 2, 3};
  write_file_atomic(t / "y.bin", b);
  EXPECT_EQ(read_file_bytes(t / "y.bin"), b);
}
