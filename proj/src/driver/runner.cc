#include "cxlsim/driver/runner.hh"

#include "cxlsim/driver/system.hh"
#include "cxlsim/driver/variant.hh"

namespace cxlsim {

WorkloadSpec scale_threads(const WorkloadSpec& spec, uint32_t threads) {
  WorkloadSpec out = spec;
  if (threads == 0 || threads == spec.thread_count) return out;
  uint64_t total = spec.ops_per_thread * spec.thread_count;
  out.thread_count = threads;
  out.ops_per_thread = std::max<uint64_t>(1, total / threads);
  return out;
}

RunRecord simulate(SimConfig cfg, const std::string& variant, TraceSet traces) {
  apply_variant(cfg, variant);
  System sys(cfg, std::move(traces));
  sys.run();
  return sys.record(variant);
}

}  // namespace cxlsim
