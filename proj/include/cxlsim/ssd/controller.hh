#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cxlsim/cxl/link.hh"
#include "cxlsim/flash/flash_backend.hh"
#include "cxlsim/ssd/data_cache.hh"
#include "cxlsim/ssd/write_log.hh"

namespace cxlsim {

struct SsdStats {
  uint64_t reads = 0;  // demand MemRd
  uint64_t log_hits = 0;
  uint64_t cache_hits = 0;
  uint64_t fetch_joins = 0;
  uint64_t flash_fetches = 0;
  uint64_t delay_ndrs = 0;
  uint64_t writes = 0;
  uint64_t log_appends = 0;
  uint64_t log_stall_writes = 0;
  uint64_t compactions = 0;
  uint64_t compaction_reads = 0;
  uint64_t compaction_programs = 0;
  uint64_t compaction_skips = 0;  // LPAs nulled by promotion before their program
  uint64_t dirty_evictions = 0;
  uint64_t migration_reads = 0;
  uint64_t installs = 0;
  uint64_t nominations = 0;
  uint64_t drops = 0;
};

// Device side of the CXL-SSD: write log, data cache and the flash backend.
// Functional effects of a request apply when it arrives at the device.
class SsdController {
 public:
  using PromotionTrigger = std::function<void(uint64_t lpa)>;

  SsdController(EventQueue& eq, const SimConfig& cfg, FlashBackend& flash, CxlLink& link);

  void set_promotion_trigger(PromotionTrigger t) { promote_ = std::move(t); }

  // Entry point for every request delivered by the link.
  void handle(const M2SRequest& req);

  // Called when a promotion finishes: forget the page on the device side
  // and route nothing to it until it is installed again. Returns whether
  // the device held data newer than flash.
  bool drop_promoted_page(uint64_t lpa);

  // A nominated page is still worth promoting.
  bool resident(uint64_t lpa) const;
  bool host_owned(uint64_t lpa) const { return host_owned_.contains(lpa); }

  // Newest device-side value of a line: log, then cache, then flash.
  uint64_t peek_line(uint64_t lpa, uint32_t page_offset) const;

  SimTime lookup_cost() const { return lookup_cost_; }
  bool log_enabled() const { return log_ != nullptr; }
  const WriteLog* write_log() const { return log_.get(); }
  const DataCache& cache() const { return cache_; }
  bool compacting() const { return compacting_; }
  bool idle() const;
  const SsdStats& stats() const { return stats_; }

 private:
  struct Waiter {
    M2SRequest req;
  };
  struct Fetch {
    std::vector<Waiter> waiters;
  };

  void handle_read(const M2SRequest& req);
  void handle_write(const M2SRequest& req);
  void handle_install(const M2SRequest& req);
  void apply_write(const M2SRequest& req);
  void respond_at(SimTime at, S2MResponse resp);
  void start_fetch(uint64_t lpa);
  void on_fill(uint64_t lpa, const PageData& flash_data);
  void serve_waiter(const Waiter& w, PageData& page, CachePage* cached, SimTime at);
  CachePage* install(uint64_t lpa, const PageData& data, bool dirty);
  void record_access(CachePage& page);

  void maybe_start_compaction();
  void start_compaction();
  void compaction_step_done();
  void finish_compaction();

  EventQueue& eq_;
  const SimConfig& cfg_;
  FlashBackend& flash_;
  CxlLink& link_;
  std::unique_ptr<WriteLog> log_;
  DataCache cache_;
  SimTime lookup_cost_;
  SimTime dram_access_;
  PromotionTrigger promote_;

  std::unordered_map<uint64_t, Fetch> pending_;
  std::unordered_set<uint64_t> host_owned_;
  std::deque<M2SRequest> stalled_writes_;
  bool compacting_ = false;
  uint64_t compaction_outstanding_ = 0;
  SsdStats stats_;
};

}  // namespace cxlsim
