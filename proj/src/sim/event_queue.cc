#include "cxlsim/sim/event_queue.hh"

#include <stdexcept>

#include <fmt/core.h>

namespace cxlsim {

namespace {

uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h * 0x100000001b3ULL;
}

}  // namespace

void EventQueue::schedule(SimTime at, Action action, ComponentId target) {
  if (at < now_) {
    throw std::logic_error(
        fmt::format("event scheduled in the past: at={}ps now={}ps", at.ps, now_.ps));
  }
  heap_.push(Event{at, next_seq_++, target, std::move(action)});
}

SimTime EventQueue::run(std::optional<SimTime> until) {
  while (!heap_.empty()) {
    if (until && heap_.top().fire_at > *until) break;
    // priority_queue::top is const; the event is popped before running so the
    // action may schedule more work.
    Event ev = std::move(const_cast<Event&>(heap_.top()));
    heap_.pop();
    now_ = ev.fire_at;
    ++dispatched_;
    digest_ = mix(mix(mix(digest_, ev.fire_at.ps), ev.seq), static_cast<uint64_t>(ev.target));
    if (ev.action) ev.action();
  }
  return now_;
}

}  // namespace cxlsim
