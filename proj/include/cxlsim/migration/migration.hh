#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cxlsim/cxl/link.hh"
#include "cxlsim/host/page_table.hh"
#include "cxlsim/ssd/controller.hh"

namespace cxlsim {

// Per-line progress of an in-flight promotion.
enum class LineState : uint8_t { kNotCopied, kInFlight, kHost };

struct PlbEntry {
  bool valid = false;
  uint64_t lpa = 0;
  uint64_t frame = 0;
  uint64_t migrated_bitmap = 0;  // bit set when the line's copy is issued
  std::array<LineState, kLinesPerPage> line{};
  uint32_t next_line = 0;
  uint32_t landed = 0;  // copies returned after the last one was issued
  SimTime started;
};

struct MigrationStats {
  uint64_t triggers = 0;
  uint64_t promotions_started = 0;
  uint64_t promotions = 0;
  uint64_t demotions = 0;
  uint64_t deferred = 0;
  uint64_t dropped = 0;
  uint64_t stale_copies = 0;  // landed copies discarded because the host wrote the line
  uint32_t max_plb_occupancy = 0;
};

// Promotion of hot SSD pages into the host pool, with a PLB tracking
// in-flight copies, and LRU demotion when the pool is full.
class MigrationManager {
 public:
  using TlbShootdown = std::function<void()>;

  MigrationManager(EventQueue& eq, const SimConfig& cfg, PageTable& pt, CxlLink& link, SsdController& ssd);

  void set_tlb_shootdown(TlbShootdown f) { tlb_ = std::move(f); }

  // Promotion trigger from the device.
  void on_trigger(uint64_t lpa);

  struct Route {
    bool host = false;
    uint64_t frame = 0;
  };
  // Routing of a demand access to a CXL-SSD page. Writes to a line whose
  // copy is already issued go to the host copy.
  Route route_read(uint64_t lpa, uint32_t line) const;
  Route route_write(uint64_t lpa, uint32_t line);
  bool migrating(uint64_t lpa) const { return plb_index_.contains(lpa); }

  // Record a host access for demotion recency.
  void touch_frame(uint64_t frame, SimTime now);

  uint32_t plb_occupancy() const { return static_cast<uint32_t>(plb_index_.size()); }
  const MigrationStats& stats() const { return stats_; }
  bool idle() const { return plb_index_.empty(); }

 private:
  void start(uint64_t lpa);
  void issue_copy(size_t slot);
  void complete(size_t slot);
  bool demote_one();
  void drain_deferred();
  bool eligible(uint64_t lpa) const;

  EventQueue& eq_;
  const SimConfig& cfg_;
  PageTable& pt_;
  CxlLink& link_;
  SsdController& ssd_;
  TlbShootdown tlb_;

  std::vector<PlbEntry> plb_;
  std::unordered_map<uint64_t, size_t> plb_index_;
  std::deque<uint64_t> deferred_;
  std::unordered_set<uint64_t> deferred_set_;
  // Completed promotions, by frame.
  std::unordered_set<uint64_t> promoted_frames_;
  MigrationStats stats_;
};

}  // namespace cxlsim
