#include "cxlsim/os/scheduler.hh"

namespace cxlsim {

void Scheduler::make_runnable(Thread& t) {
  t.state = Thread::State::kRunnable;
  pool_.push_back(t.id);
}

std::optional<uint32_t> Scheduler::pick(const std::vector<Thread>& threads) {
  if (pool_.empty()) return std::nullopt;
  size_t at = 0;
  switch (policy_) {
    case SchedPolicyKind::kRoundRobin: at = 0; break;
    case SchedPolicyKind::kRandom: at = rng_.below(pool_.size()); break;
    case SchedPolicyKind::kFairness:
      for (size_t i = 1; i < pool_.size(); ++i) {
        const Thread& a = threads[pool_[i]];
        const Thread& b = threads[pool_[at]];
        if (a.received_exec_time < b.received_exec_time ||
            (a.received_exec_time == b.received_exec_time && a.id < b.id)) {
          at = i;
        }
      }
      break;
  }
  uint32_t id = pool_[at];
  pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(at));
  return id;
}

}  // namespace cxlsim
