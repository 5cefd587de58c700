#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cxlsim/cxl/link.hh"
#include "cxlsim/host/cache.hh"
#include "cxlsim/host/host_dram.hh"
#include "cxlsim/host/page_table.hh"
#include "cxlsim/metrics/stats.hh"
#include "cxlsim/migration/migration.hh"
#include "cxlsim/os/scheduler.hh"
#include "cxlsim/os/thread.hh"

namespace cxlsim {

struct HostStats {
  uint64_t ctx_switches = 0;
  uint64_t exceptions = 0;
  uint64_t onchip_hits = 0;
  uint64_t mshr_stalls = 0;
  uint64_t stale_responses = 0;
  uint64_t llc_mshr_allocs = 0;
  uint64_t llc_mshr_fills = 0;
  uint64_t llc_mshr_squash_frees = 0;
  uint64_t downstream_reads = 0;
  uint64_t fresh_reissues = 0;  // new requester joined a delayed miss
  uint32_t max_llc_mshr = 0;
  uint32_t max_private_mshr = 0;
};

// Cores, caches, MSHRs and the OS glue. Stores are write-through and
// no-allocate: a store commits when it reaches the head of the window and
// then waits in the core's store buffer for its completion.
class Host {
 public:
  Host(EventQueue& eq, const SimConfig& cfg, const std::vector<ThreadTrace>& traces, PageTable& pt, HostDram& dram,
       CxlLink& link, MigrationManager* migration);

  // Places the first min(threads, cores) threads without switch cost.
  void start();

  bool all_done() const { return done_threads_ == threads_.size(); }
  SimTime finish_time() const { return finish_time_; }

  // Charges each running core its share of a TLB shootdown.
  void tlb_shootdown();

  std::vector<CoreTime> core_times(SimTime end) const;
  uint64_t retired_instructions() const;

  // Committed stores in commit order: (virtual line, value).
  const std::vector<std::pair<uint64_t, uint64_t>>& commits() const { return commits_; }
  void set_record_commits(bool on) { record_commits_ = on; }

  const std::vector<Thread>& threads() const { return threads_; }
  const HostStats& stats() const { return stats_; }
  const AmatCounters& amat() const { return amat_; }
  const Scheduler& scheduler() const { return sched_; }
  size_t llc_mshr_live() const { return llc_mshr_.size(); }
  size_t private_mshr_live(uint32_t core) const { return cores_[core].mshr.size(); }
  uint32_t running_thread(uint32_t core) const;

  // Value a load of `vaddr` would observe once the system is quiescent.
  static uint64_t store_token(uint32_t thread, size_t trace_idx) {
    return (uint64_t{thread} + 1) << 40 | (trace_idx + 1);
  }

 private:
  enum class Mode : uint8_t { kIdle, kSwitching, kRunning };
  enum class Blocked : uint8_t { kNone, kWindow, kMshr };

  struct Core {
    uint32_t id = 0;
    Mode mode = Mode::kIdle;
    SimTime mode_since;
    int thread = -1;
    PresenceCache priv;
    std::unordered_map<uint64_t, std::vector<uint64_t>> mshr;  // line -> waiting op ids
    uint32_t sb_used = 0;
    Blocked blocked = Blocked::kNone;
    SimTime stall_until;
    SimTime compute_until;
    uint64_t step_token = 0;
    CoreTime time;

    explicit Core(PresenceCache c) : priv(std::move(c)) {}
  };

  struct Target {
    bool host = false;
    uint64_t id = 0;  // frame or LPA
    uint32_t line = 0;
  };
  struct LlcEntry {
    uint64_t id = 0;
    uint64_t cores = 0;  // bitmask
    bool delayed = false;
    bool no_delay = false;
    Target target;
  };

  static uint64_t line_key(const Target& t);

  void schedule_step(Core& c, SimTime at);
  void step(Core& c);
  bool issue_load(Core& c, Thread& th, uint64_t vaddr);
  void issue_store(Thread& th, uint64_t vaddr);
  void send_downstream(uint64_t line, const LlcEntry& e, SimTime at);
  void on_response(uint64_t line, uint64_t id, const S2MResponse& resp);
  void complete_onchip(uint32_t tid, uint64_t op_id);
  void try_retire(Core& c);
  void commit_store(Core& c, Thread& th, const PendingOp& op);
  void raise_exception(Core& c);
  void squash(Core& c, Thread& th);
  void thread_exit(Core& c);
  void begin_switch(Core& c, uint32_t tid);
  void dispatch_idle();
  void set_mode(Core& c, Mode m);
  void account_runtime(Thread& th);
  void wake_mshr_blocked();
  PendingOp* find_op(Thread& th, uint64_t op_id);

  EventQueue& eq_;
  const SimConfig& cfg_;
  PageTable& pt_;
  HostDram& dram_;
  CxlLink& link_;
  MigrationManager* mig_;
  SimTime cycle_;
  SimTime private_hit_;
  SimTime llc_hit_;

  std::vector<Thread> threads_;
  std::vector<Core> cores_;
  PresenceCache llc_;
  std::unordered_map<uint64_t, LlcEntry> llc_mshr_;
  Scheduler sched_;
  uint64_t next_op_id_ = 1;
  uint64_t next_llc_id_ = 1;
  size_t done_threads_ = 0;
  SimTime finish_time_;
  bool record_commits_ = true;
  std::vector<std::pair<uint64_t, uint64_t>> commits_;
  AmatCounters amat_;
  HostStats stats_;
};

}  // namespace cxlsim
