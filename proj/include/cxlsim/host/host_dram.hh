#pragma once

#include <cstdint>

#include "cxlsim/sim/config.hh"

namespace cxlsim {

// Fixed latency behind an aggregate bandwidth serializer.
class HostDram {
 public:
  explicit HostDram(const SimConfig& cfg)
      : latency_(SimTime::from_ns(cfg.host_dram_latency_ns)),
        xfer_(SimTime::from_ps(kLineBytes * 1'000'000'000'000ull / cfg.host_dram_bandwidth_byte_s)) {}

  // Completion time of a 64B access issued at `now`.
  SimTime access(SimTime now) {
    busy_ = max(now, busy_) + xfer_;
    ++accesses_;
    return busy_ + latency_;
  }

  SimTime latency() const { return latency_; }
  uint64_t accesses() const { return accesses_; }

 private:
  SimTime latency_;
  SimTime xfer_;
  SimTime busy_;
  uint64_t accesses_ = 0;
};

}  // namespace cxlsim
