#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "cxlsim/os/thread.hh"
#include "cxlsim/sim/config.hh"
#include "cxlsim/sim/rng.hh"

namespace cxlsim {

// Global runnable pool with a pluggable pick rule.
//   RR:       FIFO order
//   RANDOM:   uniform over the pool, seeded
//   FAIRNESS: least received execution time, ties to the lowest id
class Scheduler {
 public:
  Scheduler(SchedPolicyKind policy, uint64_t seed) : policy_(policy), rng_(mix_seed(seed, 0x5343484544ULL)) {}

  void make_runnable(Thread& t);
  // Removes and returns the chosen thread, if any.
  std::optional<uint32_t> pick(const std::vector<Thread>& threads);

  bool empty() const { return pool_.empty(); }
  size_t size() const { return pool_.size(); }
  SchedPolicyKind policy() const { return policy_; }
  const std::deque<uint32_t>& pool() const { return pool_; }

 private:
  SchedPolicyKind policy_;
  Rng rng_;
  std::deque<uint32_t> pool_;
};

}  // namespace cxlsim
