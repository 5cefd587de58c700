#include <doctest.h>

#include <vector>

#include "cxlsim/driver/system.hh"
#include "cxlsim/migration/migration.hh"
#include <fmt/core.h>

#include "helpers.hh"

using namespace cxlsim;
using namespace cxlsim::literals;

namespace {

struct Rig {
  SimConfig cfg;
  EventQueue eq;
  FlashBackend flash;
  CxlLink link;
  SsdController ssd;
  PageTable pt;
  MigrationManager mig;
  std::vector<SimTime> shootdowns;

  explicit Rig(SimConfig c, uint64_t pool_frames)
      : cfg(c), flash(eq, cfg), link(eq, cfg), ssd(eq, cfg, flash, link), pt(256, pool_frames),
        mig(eq, cfg, pt, link, ssd) {
    link.attach_device([this](const M2SRequest& r) { ssd.handle(r); });
    for (uint64_t v = 0; v < 256; ++v) pt.map_ssd(v);
    flash.precondition(256);
    mig.set_tlb_shootdown([this] { shootdowns.push_back(eq.now()); });
  }
  void send(M2SKind k, uint64_t lpa, uint32_t off, uint64_t v = 0) {
    M2SRequest r;
    r.kind = k;
    r.addr = device_addr(lpa, off);
    r.data = v;
    link.send_request(r, {});
  }
  // Brings pages into the SSD data cache.
  void warm(uint64_t first, uint64_t n) {
    for (uint64_t p = first; p < first + n; ++p) send(M2SKind::kMemRd, p, 0);
    eq.run();
  }
};

SimConfig mig_config() {
  SimConfig c = test::small_config();
  c.device_triggered_ctx_swt = false;
  c.promotion_enable = true;
  c.ssd_cache_size_byte = 256 * 4096;
  return c;
}

}  // namespace

TEST_CASE("migration: one trigger copies 64 lines and remaps the page") {
  Rig r(mig_config(), 16);
  r.warm(5, 1);
  SimTime t0 = r.eq.now();
  r.mig.on_trigger(5);
  CHECK(r.mig.migrating(5));
  r.eq.run();
  CHECK(r.mig.stats().promotions == 1);
  CHECK(r.ssd.stats().migration_reads == 64);
  CHECK(r.pt.at(5).where == PageLocation::Where::kHostDram);
  REQUIRE(r.shootdowns.size() == 1);
  CHECK(r.shootdowns[0] - t0 >= r.link.slot() * 64);
  CHECK(r.ssd.host_owned(5));
  CHECK(!r.ssd.cache().find(5));
  CHECK(r.mig.idle());
}

TEST_CASE("migration: the 65th concurrent promotion is deferred") {
  Rig r(mig_config(), 128);
  r.warm(0, 65);
  for (uint64_t p = 0; p < 65; ++p) r.mig.on_trigger(p);
  CHECK(r.mig.plb_occupancy() == 64);
  CHECK(r.mig.stats().deferred == 1);
  r.eq.run();
  CHECK(r.mig.stats().promotions == 65);
  CHECK(r.mig.stats().max_plb_occupancy == 64);
}

TEST_CASE("migration: full pool with nothing demotable drops the trigger") {
  Rig r(mig_config(), 1);
  r.warm(0, 2);
  r.mig.on_trigger(0);  // takes the only frame, still in flight
  r.mig.on_trigger(1);
  CHECK(r.mig.stats().dropped == 1);
  r.eq.run();
  CHECK(r.mig.stats().promotions == 1);
}

TEST_CASE("migration: pool of 2, third promotion demotes the LRU page") {
  Rig r(mig_config(), 2);
  r.warm(0, 3);
  r.mig.on_trigger(0);
  r.eq.run();
  r.mig.on_trigger(1);
  r.eq.run();
  r.eq.schedule_in(1_us, [] {});
  r.eq.run();
  r.mig.touch_frame(r.pt.at(0).id, r.eq.now());  // page 1 is now the LRU
  r.mig.on_trigger(2);
  r.eq.run();
  CHECK(r.mig.stats().demotions == 1);
  CHECK(r.mig.stats().promotions == 3);
  CHECK(r.pt.at(1).where == PageLocation::Where::kCxlSsd);
  CHECK(r.pt.at(0).where == PageLocation::Where::kHostDram);
  // Demoted page sits in the data cache again, clean.
  const CachePage* p = r.ssd.cache().find(1);
  REQUIRE(p);
  CHECK(!p->dirty);
  CHECK(!r.ssd.host_owned(1));
}

TEST_CASE("migration: clean demoted page is not written to flash on eviction") {
  SimConfig c = mig_config();
  c.ssd_cache_size_byte = 2 * 4096;
  c.ssd_cache_way = 1;
  Rig r(c, 1);
  r.warm(0, 1);
  r.mig.on_trigger(0);
  r.eq.run();
  r.warm(2, 1);
  r.mig.on_trigger(2);  // demotes page 0 into set 0
  r.eq.run();
  REQUIRE(r.mig.stats().demotions == 1);
  uint64_t programs = r.flash.stats().programs;
  r.warm(4, 1);  // same set as page 0
  CHECK(!r.ssd.cache().find(0));
  CHECK(r.flash.stats().programs == programs);
}

TEST_CASE("migration: logged data travels with the page and is never compacted") {
  SimConfig c = mig_config();
  c.write_log_size_byte = 2 * 4 * 64;
  Rig r(c, 4);
  r.warm(7, 1);
  r.send(M2SKind::kMemWr, 7, 3, 42);
  r.eq.run();
  r.mig.on_trigger(7);
  r.eq.run();
  auto& fr = r.pt.frame(r.pt.at(7).id);
  CHECK(fr.data[3] == 42);
  CHECK(fr.dirty);  // flash does not hold the logged line
  // Fill the log with other pages so it compacts.
  for (uint64_t p = 20; p < 24; ++p) r.send(M2SKind::kMemWr, p, 0, p);
  r.eq.run();
  CHECK(r.ssd.stats().compactions >= 1);
  CHECK(r.flash.content(7)[3] == 0);
}

TEST_CASE("migration: line routing during a copy") {
  SimConfig c = mig_config();
  c.migration_copy_window = 1;
  Rig r(c, 4);
  r.warm(9, 1);
  r.mig.on_trigger(9);
  // Line 0 is in flight, line 10 not yet copied.
  CHECK(!r.mig.route_read(9, 0).host);
  CHECK(!r.mig.route_read(9, 10).host);
  CHECK(!r.mig.route_write(9, 10).host);
  auto w = r.mig.route_write(9, 0);
  CHECK(w.host);
  CHECK(r.mig.route_read(9, 0).host);
  r.pt.frame(w.frame).data[0] = 77;
  r.eq.run();
  CHECK(r.mig.stats().stale_copies == 1);
  CHECK(r.pt.frame(w.frame).data[0] == 77);
}

TEST_CASE("migration: host reads and writes after promotion use host DRAM") {
  SimConfig c = test::small_config();
  c.device_triggered_ctx_swt = false;
  c.promotion_threshold = 2;
  std::string t;
  for (int i = 0; i < 6; ++i) t += fmt::format("R{:x} C2000 ", i * 64);
  t += "C20000 R800 W840";
  System s(c, test::make_set({test::make_trace(0, 64 * 4096, t)}));
  s.run();
  REQUIRE(s.migration().stats().promotions == 1);
  auto rec = s.record("P");
  CHECK(rec.amat.count(RequestClass::kHostRead) >= 1);
  CHECK(rec.amat.count(RequestClass::kHostWrite) == 1);
  CHECK(s.ssd().stats().log_appends == 0);
  CHECK(!s.check_memory_image());
}

TEST_CASE("migration: a write to a not-yet-copied line reaches the host copy") {
  SimConfig c = test::small_config();
  c.device_triggered_ctx_swt = false;
  c.promotion_threshold = 1;
  c.migration_copy_window = 1;
  std::string t = "R0 C400 R40 C2000 ";
  for (int i = 0; i < 64; ++i) t += fmt::format("W{:x} ", 4096 - 64 * (i + 1));
  System s(c, test::make_set({test::make_trace(0, 64 * 4096, t)}));
  s.run();
  CHECK(s.migration().stats().promotions == 1);
  CHECK(s.ssd().stats().log_appends > 0);  // some writes landed before their line was copied
  CHECK(!s.check_memory_image());
}
