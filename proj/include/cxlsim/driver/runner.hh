#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cxlsim/metrics/stats.hh"
#include "cxlsim/sim/config.hh"
#include "cxlsim/trace/trace.hh"
#include "cxlsim/trace/workload.hh"

namespace cxlsim {

// Scales a workload to `threads` while keeping total memory operations
// fixed (ops_per_thread = total / threads).
WorkloadSpec scale_threads(const WorkloadSpec& spec, uint32_t threads);

// Applies the variant and runs one simulation.
RunRecord simulate(SimConfig cfg, const std::string& variant, TraceSet traces);

}  // namespace cxlsim
