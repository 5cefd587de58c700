#include <doctest.h>

#include <optional>
#include <vector>

#include "cxlsim/cxl/link.hh"
#include "cxlsim/flash/flash_backend.hh"
#include "cxlsim/sim/rng.hh"
#include "cxlsim/ssd/controller.hh"
#include "cxlsim/ssd/data_cache.hh"
#include "cxlsim/ssd/log_index.hh"
#include "cxlsim/ssd/write_log.hh"
#include "helpers.hh"

using namespace cxlsim;
using namespace cxlsim::literals;

TEST_CASE("log index: level-2 growth at the 0.75 load factor") {
  LogIndex idx(16);
  idx.upsert(9, 0, 0);
  idx.upsert(9, 1, 1);
  idx.upsert(9, 2, 2);
  CHECK(idx.l2_capacity(9) == 4);  // 3/4 is not above 0.75
  idx.upsert(9, 3, 3);
  CHECK(idx.l2_capacity(9) == 8);  // 4/4 would be
  for (uint32_t i = 4; i < 6; ++i) idx.upsert(9, i, i);
  CHECK(idx.l2_capacity(9) == 8);  // 6/8
  idx.upsert(9, 6, 6);
  CHECK(idx.l2_capacity(9) == 16);  // 7/8
  for (uint32_t i = 0; i < 7; ++i) CHECK(idx.lookup(9, i) == i);
}

TEST_CASE("log index: growth happens exactly when post-insert load exceeds 0.75") {
  LogIndex idx(4);
  for (uint32_t off = 0; off < 64; ++off) {
    uint32_t before = idx.l2_capacity(1);
    uint32_t size_before = idx.l2_size(1);
    idx.upsert(1, off, off);
    if (before == 0) {
      CHECK(idx.l2_capacity(1) == LogIndex::kL2InitialSlots);
      continue;
    }
    bool expect_grow = 4ull * (size_before + 1) > 3ull * before;
    CHECK((idx.l2_capacity(1) > before) == expect_grow);
  }
  CHECK(idx.l2_size(1) == 64);
}

TEST_CASE("log index: upsert of an existing line replaces the offset") {
  LogIndex idx(8);
  idx.upsert(2, 5, 10);
  idx.upsert(2, 5, 11);
  CHECK(idx.l2_size(2) == 1);
  CHECK(idx.entry_count() == 1);
  CHECK(idx.lookup(2, 5) == 11u);
  CHECK(!idx.lookup(2, 6));
  CHECK(!idx.lookup(3, 5));
}

TEST_CASE("log index: erase keeps other keys reachable") {
  LogIndex idx(64);
  Rng rng(2);
  std::vector<uint64_t> keys;
  for (int i = 0; i < 40; ++i) {
    uint64_t k = rng.below(1000);
    if (idx.contains(k)) continue;
    keys.push_back(k);
    idx.upsert(k, static_cast<uint32_t>(i % 64), static_cast<uint32_t>(i));
  }
  for (size_t i = 0; i < keys.size(); i += 2) CHECK(idx.erase(keys[i]));
  for (size_t i = 0; i < keys.size(); ++i) CHECK(idx.contains(keys[i]) == (i % 2 == 1));
  CHECK(!idx.erase(keys[0]));
  CHECK(idx.lpa_count() == keys.size() / 2);
}

TEST_CASE("log index: one line per page stays within 32B per entry") {
  const uint64_t n = 1 << 14;
  LogIndex idx(n);
  for (uint64_t i = 0; i < n; ++i) idx.upsert(i * 7919, static_cast<uint32_t>(i % 64), static_cast<uint32_t>(i));
  CHECK(idx.memory_bytes() <= 32 * n);
  CHECK_THROWS_AS(idx.upsert(1ull << 40, 0, 0), std::length_error);
}

TEST_CASE("write log: newest version wins, merge applies both buffers") {
  WriteLog log(4 * 64);  // two entries per buffer
  log.active().append(1, 3, 100);
  log.active().append(1, 4, 200);
  log.swap();
  log.active().append(1, 3, 300);
  CHECK(log.lookup(1, 3) == 300u);
  CHECK(log.lookup(1, 4) == 200u);
  PageData p{};
  log.merge_into(1, p);
  CHECK(p[3] == 300);
  CHECK(p[4] == 200);
  CHECK_THROWS_AS(log.swap(), std::logic_error);
  CHECK(log.drop(1));
  CHECK(!log.contains(1));
}

TEST_CASE("data cache: LRU within a set") {
  DataCache c(4 * 4096, 2);  // 2 sets x 2 ways
  PageData d{};
  c.insert(0, d, false);
  c.insert(2, d, true);
  c.touch(*c.find(0));
  auto ins = c.insert(4, d, false);
  REQUIRE(ins.victim);
  CHECK(ins.victim->lpa == 2);
  CHECK(ins.victim->dirty);
  CHECK(c.find(0));
  CHECK(!c.find(2));
  CHECK(c.resident_pages() == 2);
}

namespace {

struct Rig {
  SimConfig cfg;
  EventQueue eq;
  FlashBackend flash;
  CxlLink link;
  SsdController ssd;
  std::vector<S2MResponse> got;

  explicit Rig(SimConfig c) : cfg(c), flash(eq, cfg), link(eq, cfg), ssd(eq, cfg, flash, link) {
    link.attach_device([this](const M2SRequest& r) { ssd.handle(r); });
    flash.precondition(64);
  }
  void read(uint64_t lpa, uint32_t off) {
    M2SRequest r;
    r.kind = M2SKind::kMemRd;
    r.addr = device_addr(lpa, off);
    link.send_request(r, [this](const S2MResponse& s) { got.push_back(s); });
  }
  void write(uint64_t lpa, uint32_t off, uint64_t v) {
    M2SRequest r;
    r.kind = M2SKind::kMemWr;
    r.addr = device_addr(lpa, off);
    r.data = v;
    link.send_request(r, [this](const S2MResponse& s) { got.push_back(s); });
  }
  S2MResponse read_now(uint64_t lpa, uint32_t off) {
    got.clear();
    read(lpa, off);
    eq.run();
    REQUIRE(got.size() == 1);
    return got[0];
  }
};

SimConfig rig_config(uint64_t log_bytes = 4096) {
  SimConfig c = test::small_config();
  c.device_triggered_ctx_swt = false;
  c.write_log_size_byte = log_bytes;
  c.ssd_cache_size_byte = 64 * 4096;
  return c;
}

PageData page_of(uint64_t v) {
  PageData p{};
  for (uint32_t i = 0; i < kLinesPerPage; ++i) p[i] = v * 100 + i;
  return p;
}

}  // namespace

TEST_CASE("ssd: written line on an uncached page is served from the log") {
  Rig r(rig_config());
  r.write(5, 7, 77);
  r.eq.run();
  auto s = r.read_now(5, 7);
  CHECK(s.kind == S2MKind::kMemData);
  CHECK(s.data == 77);
  CHECK(s.service == RequestClass::kSsdReadHit);
  CHECK(r.flash.stats().reads == 0);
}

TEST_CASE("ssd: read of an unwritten line fetches, merges and returns") {
  Rig r(rig_config());
  r.flash.program_page(3, page_of(3));
  r.eq.run();
  auto s = r.read_now(3, 9);
  CHECK(s.data == 309);
  CHECK(s.service == RequestClass::kSsdReadMiss);
  CHECK(r.flash.stats().reads == 1);
  CHECK(r.ssd.cache().find(3));
  auto again = r.read_now(3, 9);
  CHECK(again.service == RequestClass::kSsdReadHit);
  CHECK(r.flash.stats().reads == 1);
}

TEST_CASE("ssd: logged line is merged into the fetched page") {
  Rig r(rig_config());
  r.flash.program_page(3, page_of(3));
  r.eq.run();
  r.write(3, 1, 55);
  r.eq.run();
  CHECK(r.read_now(3, 2).data == 302);  // miss, page merged
  CHECK(r.ssd.cache().find(3)->data[1] == 55);
  CHECK(r.read_now(3, 1).data == 55);
}

TEST_CASE("ssd: a cached write is visible to the next read") {
  Rig r(rig_config());
  r.read_now(4, 0);
  r.write(4, 0, 99);
  r.eq.run();
  CHECK(r.ssd.cache().find(4)->data[0] == 99);
  CHECK(r.read_now(4, 0).data == 99);
}

TEST_CASE("ssd: request latency on a hit is link + lookup + DRAM") {
  Rig r(rig_config());
  r.write(6, 0, 1);
  r.eq.run();
  SimTime start = r.eq.now();
  SimTime at;
  M2SRequest rq;
  rq.kind = M2SKind::kMemRd;
  rq.addr = device_addr(6, 0);
  r.link.send_request(rq, [&](const S2MResponse&) { at = r.eq.now(); });
  r.eq.run();
  // 44ns each way plus max(72, 49) + 60 ns inside the device.
  CHECK(at - start == SimTime::from_ns(44 + 132 + 44));
}

TEST_CASE("ssd: two writes to one line, compaction keeps only the newest") {
  Rig r(rig_config(4 * 64));  // two entries per buffer
  r.write(2, 8, 1);
  r.write(2, 8, 2);
  r.eq.run();
  CHECK(r.ssd.stats().compactions == 1);
  CHECK(r.flash.stats().programs == 1);
  CHECK(r.flash.content(2)[8] == 2);
}

TEST_CASE("ssd: full log swaps and the next write lands in the fresh buffer") {
  Rig r(rig_config(4 * 64));
  r.write(1, 0, 10);
  r.write(2, 0, 20);
  r.eq.run(r.eq.now() + SimTime::from_ns(300));
  CHECK(r.ssd.stats().compactions == 1);
  r.write(3, 0, 30);
  r.eq.run();
  CHECK(r.ssd.write_log()->lookup(3, 0) == 30u);
  CHECK(r.flash.content(1)[0] == 10);
  CHECK(r.flash.content(2)[0] == 20);
}

TEST_CASE("ssd: compaction of 64 lines of a cached page is one program, no read") {
  Rig r(rig_config(2 * 64 * 64));
  r.read_now(7, 0);
  uint64_t reads = r.flash.stats().reads;
  for (uint32_t i = 0; i < 64; ++i) r.write(7, i, 1000 + i);
  r.eq.run();
  CHECK(r.ssd.stats().compactions == 1);
  CHECK(r.flash.stats().reads - reads == 0);
  CHECK(r.flash.stats().programs == 1);
  CHECK(r.flash.content(7)[63] == 1063);
}

TEST_CASE("ssd: compaction of 3 uncached pages is 3 reads and 3 programs") {
  Rig r(rig_config(2 * 3 * 64));
  for (uint64_t p = 0; p < 3; ++p) r.write(p + 10, 0, p);
  r.eq.run();
  CHECK(r.ssd.stats().compactions == 1);
  CHECK(r.flash.stats().reads == 3);
  CHECK(r.flash.stats().programs == 3);
}

TEST_CASE("ssd: empty log generates no flash traffic") {
  Rig r(rig_config());
  r.eq.run();
  CHECK(r.flash.stats().reads == 0);
  CHECK(r.flash.stats().programs == 0);
  CHECK(r.ssd.idle());
}

TEST_CASE("ssd: writes stall while both buffers are busy and drain afterwards") {
  Rig r(rig_config(2 * 64));  // one entry per buffer
  for (uint64_t i = 0; i < 6; ++i) r.write(20 + i, 0, i + 1);
  r.eq.run();
  CHECK(r.ssd.stats().log_stall_writes > 0);
  CHECK(r.got.size() == 6);
  for (uint64_t i = 0; i < 6; ++i) CHECK(r.ssd.peek_line(20 + i, 0) == i + 1);
  CHECK(r.ssd.idle());
}

TEST_CASE("ssd: base mode write-allocates and evicts dirty pages to flash") {
  SimConfig c = rig_config();
  c.write_log_enable = false;
  c.ssd_dram_size_byte = 2 * 4096;
  c.ssd_cache_way = 1;
  Rig r(c);
  r.write(0, 0, 5);  // miss, write waits for the fill
  r.eq.run();
  CHECK(r.flash.stats().reads == 1);
  CHECK(r.ssd.cache().find(0)->dirty);
  r.read_now(2, 0);  // same set, evicts page 0
  CHECK(r.ssd.stats().dirty_evictions == 1);
  CHECK(r.flash.content(0)[0] == 5);
  CHECK(r.ssd.lookup_cost() == SimTime::from_ns(49 + 60));
}

TEST_CASE("ssd: delay NDR when the channel estimate exceeds the threshold") {
  SimConfig c = rig_config();
  c.device_triggered_ctx_swt = true;
  Rig r(c);
  auto s = r.read_now(1, 0);
  CHECK(s.is_delay());
  CHECK(r.ssd.stats().delay_ndrs == 1);
  // The fetch still ran; the replay hits.
  auto again = r.read_now(1, 0);
  CHECK(again.kind == S2MKind::kMemData);
  CHECK(again.service == RequestClass::kSsdReadHit);
}

TEST_CASE("ssd: a read joining an in-flight fetch is judged by Alg. 1 too") {
  SimConfig c = rig_config();
  c.device_triggered_ctx_swt = true;
  Rig r(c);
  r.read(1, 0);
  r.read(1, 5);  // same page, fetch already queued: est = 3 us x 2
  r.eq.run();
  REQUIRE(r.got.size() == 2);
  CHECK(r.got[0].is_delay());
  CHECK(r.got[1].is_delay());
  CHECK(r.flash.stats().reads == 1);
  CHECK(r.ssd.stats().fetch_joins == 0);
}

TEST_CASE("ssd: a no-delay read waits for the fetch") {
  SimConfig c = rig_config();
  c.device_triggered_ctx_swt = true;
  Rig r(c);
  r.read(1, 0);
  M2SRequest q;
  q.kind = M2SKind::kMemRd;
  q.addr = device_addr(1, 5);
  q.no_delay = true;
  r.link.send_request(q, [&](const S2MResponse& s) { r.got.push_back(s); });
  r.eq.run();
  REQUIRE(r.got.size() == 2);
  CHECK(r.got[0].is_delay());
  CHECK(r.got[1].kind == S2MKind::kMemData);
  CHECK(r.got[1].service == RequestClass::kSsdReadMiss);
  CHECK(r.ssd.stats().fetch_joins == 1);
}

TEST_CASE("ssd: no delay NDR below the threshold or with the feature off") {
  SimConfig c = rig_config();
  c.device_triggered_ctx_swt = true;
  c.cs_threshold = 4000;
  Rig r(c);
  CHECK(r.read_now(1, 0).kind == S2MKind::kMemData);
  Rig off(rig_config());
  CHECK(off.read_now(1, 0).kind == S2MKind::kMemData);
  CHECK(off.ssd.stats().delay_ndrs == 0);
}

TEST_CASE("ssd: promotion trigger on the 9th access with threshold 8") {
  SimConfig c = rig_config();
  c.promotion_threshold = 8;
  Rig r(c);
  std::vector<uint64_t> trig;
  r.ssd.set_promotion_trigger([&](uint64_t lpa) { trig.push_back(lpa); });
  for (int i = 0; i < 8; ++i) r.read_now(3, 0);
  CHECK(trig.empty());
  r.read_now(3, 0);
  CHECK(trig == std::vector<uint64_t>{3});
  for (int i = 0; i < 5; ++i) r.read_now(3, 0);
  CHECK(trig.size() == 1);
}

TEST_CASE("ssd: a page served only from the log never triggers") {
  SimConfig c = rig_config();
  c.promotion_threshold = 2;
  Rig r(c);
  int n = 0;
  r.ssd.set_promotion_trigger([&](uint64_t) { ++n; });
  r.write(3, 0, 1);
  r.eq.run();
  for (int i = 0; i < 10; ++i) r.read_now(3, 0);
  CHECK(n == 0);
}

TEST_CASE("ssd: promotion disabled never triggers") {
  SimConfig c = rig_config();
  c.promotion_enable = false;
  c.promotion_threshold = 1;
  Rig r(c);
  int n = 0;
  r.ssd.set_promotion_trigger([&](uint64_t) { ++n; });
  for (int i = 0; i < 10; ++i) r.read_now(3, 0);
  CHECK(n == 0);
}

TEST_CASE("ssd: dropped page is skipped by compaction") {
  Rig r(rig_config(2 * 2 * 64));
  r.write(5, 0, 1);
  r.write(6, 0, 2);  // seals the buffer; both LPAs need read + merge
  r.eq.run(r.eq.now() + SimTime::from_ns(200));
  REQUIRE(r.ssd.compacting());
  CHECK(r.ssd.drop_promoted_page(5));
  r.eq.run();
  CHECK(r.ssd.stats().compaction_skips == 1);
  CHECK(r.flash.stats().programs == 1);
  CHECK(r.ssd.host_owned(5));
}
