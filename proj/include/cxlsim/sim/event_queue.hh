#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "cxlsim/sim/sim_time.hh"

namespace cxlsim {

// Owner of an event, used only for tracing and the dispatch digest.
enum class ComponentId : uint32_t {
  kNone = 0,
  kCore,
  kCache,
  kHostDram,
  kLink,
  kSsd,
  kFlash,
  kMigration,
  kScheduler,
};

struct Event {
  SimTime fire_at;
  uint64_t seq = 0;
  ComponentId target = ComponentId::kNone;
  std::function<void()> action;
};

// Single-threaded discrete-event engine. Events at the same time dispatch
// in insertion order.
class EventQueue {
 public:
  using Action = std::function<void()>;

  SimTime now() const { return now_; }

  // Throws std::logic_error when `at` is earlier than now().
  void schedule(SimTime at, Action action, ComponentId target = ComponentId::kNone);
  void schedule_in(SimTime delay, Action action, ComponentId target = ComponentId::kNone) {
    schedule(now_ + delay, std::move(action), target);
  }

  // Dispatches events until the queue drains or the next event lies beyond
  // `until`. Returns the clock after the last dispatched event.
  SimTime run(std::optional<SimTime> until = std::nullopt);

  bool empty() const { return heap_.empty(); }
  size_t pending() const { return heap_.size(); }
  uint64_t dispatched() const { return dispatched_; }

  // Rolling hash over (fire_at, seq, target) of every dispatched event.
  uint64_t digest() const { return digest_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  SimTime now_;
  uint64_t next_seq_ = 0;
  uint64_t dispatched_ = 0;
  uint64_t digest_ = 0xcbf29ce484222325ULL;
};

}  // namespace cxlsim
