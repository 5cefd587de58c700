#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "cxlsim/flash/ftl.hh"
#include "cxlsim/sim/config.hh"
#include "cxlsim/sim/event_queue.hh"

namespace cxlsim {

enum class FlashCmdKind : uint8_t { kRead, kProgram, kErase };

// FIFO command queue of one channel. A command occupies the channel for its
// full latency; counters cover queued plus in-service commands.
class ChannelQueue {
 public:
  ChannelQueue(EventQueue& eq, FlashTiming timing) : eq_(&eq), timing_(timing) {}

  // Returns the completion time. `done` runs after counters are updated.
  SimTime enqueue(FlashCmdKind kind, std::function<void()> done, bool gc = false);

  uint32_t num_read() const { return num_read_; }
  uint32_t num_write() const { return num_write_; }
  uint32_t num_erase() const { return num_erase_; }
  bool gc_in_progress() const { return gc_outstanding_ > 0; }
  SimTime busy_until() const { return busy_until_; }

  // read_lat * (num_read + 1) + write_lat * num_write + erase_lat * num_erase
  SimTime estimate_delay() const;

 private:
  EventQueue* eq_;
  FlashTiming timing_;
  SimTime busy_until_;
  uint32_t num_read_ = 0;
  uint32_t num_write_ = 0;
  uint32_t num_erase_ = 0;
  uint32_t gc_outstanding_ = 0;
};

struct FlashStats {
  uint64_t reads = 0;     // every page read issued, including GC and compaction
  uint64_t programs = 0;  // every page program issued, including GC copies
  uint64_t erases = 0;
  uint64_t gc_runs = 0;
  uint64_t gc_copies = 0;
  uint64_t zero_reads = 0;  // reads of unmapped LPAs, served without traffic

  uint64_t read_bytes() const { return reads * kPageBytes; }
  uint64_t write_bytes() const { return programs * kPageBytes; }
};

class FlashBackend {
 public:
  using ReadDone = std::function<void(const PageData&)>;
  using Done = std::function<void()>;

  FlashBackend(EventQueue& eq, const SimConfig& cfg);

  // Maps LPAs [0, lpa_count) instantly and fills precondition_fraction of
  // the remaining blocks with invalid pages.
  void precondition(uint64_t lpa_count);

  // Page content is snapshotted when the read completes.
  void read_page(uint64_t lpa, ReadDone done);
  void program_page(uint64_t lpa, const PageData& data, Done done = {});

  bool mapped(uint64_t lpa) const { return ftl_.mapped(lpa); }
  uint32_t channel_of(uint64_t lpa) const;
  SimTime estimate_delay(uint64_t lpa) const;
  // Alg. 1: est > threshold, or GC busy on the target channel. False for
  // unmapped LPAs since those never queue.
  bool should_ctx_switch(uint64_t lpa, SimTime threshold) const;

  // Latest programmed content; zeros when never programmed.
  PageData content(uint64_t lpa) const;

  const FlashStats& stats() const { return stats_; }
  const Ftl& ftl() const { return ftl_; }
  ChannelQueue& channel(uint32_t c) { return channels_[c]; }
  const ChannelQueue& channel(uint32_t c) const { return channels_[c]; }
  uint32_t channel_count() const { return static_cast<uint32_t>(channels_.size()); }
  bool gc_active() const { return gc_pending_ > 0; }

 private:
  void maybe_start_gc();
  void gc_command_done();

  EventQueue& eq_;
  const SimConfig& cfg_;
  FlashTiming timing_;
  Ftl ftl_;
  std::vector<ChannelQueue> channels_;
  std::unordered_map<uint64_t, PageData> content_;
  FlashStats stats_;
  uint64_t gc_pending_ = 0;
};

}  // namespace cxlsim
