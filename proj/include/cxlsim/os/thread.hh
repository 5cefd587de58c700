#pragma once

#include <cstdint>
#include <deque>

#include "cxlsim/metrics/request_class.hh"
#include "cxlsim/sim/sim_time.hh"
#include "cxlsim/trace/trace.hh"

namespace cxlsim {

// An issued, not yet retired memory instruction.
struct PendingOp {
  uint64_t op_id = 0;      // globally unique
  uint64_t instr_idx = 0;  // position in the thread's instruction stream
  size_t trace_idx = 0;    // position in the trace, for replay
  bool is_write = false;
  bool done = false;
  bool marked = false;   // its miss got a delay NDR
  bool offchip = false;  // left the on-chip caches
  RequestClass service = RequestClass::kHostRead;
  SimTime issued;
  SimTime completed;
  uint64_t vaddr = 0;
  uint64_t line = 0;  // physical line key while waiting in an MSHR
};

struct Thread {
  enum class State : uint8_t { kRunnable, kRunning, kDone };

  uint32_t id = 0;
  const ThreadTrace* trace = nullptr;
  State state = State::kRunnable;

  // Issue cursor.
  size_t op_idx = 0;
  uint64_t op_progress = 0;  // instructions already issued from a compute op
  uint64_t next_instr = 0;

  std::deque<PendingOp> window;

  SimTime received_exec_time;
  SimTime run_start;
  SimTime finished_at;
  uint64_t exceptions = 0;
  // Set when an exception found no other runnable thread; the replay then
  // waits for its data instead of taking another delay.
  bool wait_for_data = false;

  bool issued_all() const { return op_idx >= trace->ops.size(); }
  uint64_t window_occupancy() const { return window.empty() ? 0 : next_instr - window.front().instr_idx; }
};

}  // namespace cxlsim
