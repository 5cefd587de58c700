#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cxlsim/trace/trace.hh"

namespace cxlsim {

struct WorkloadSpec {
  std::string name = "synthetic";
  uint64_t footprint_bytes = 128ull << 20;
  uint32_t thread_count = 8;
  uint64_t ops_per_thread = 100'000;  // memory operations per thread
  double write_ratio = 0.25;
  double zipf_theta = 0.99;           // page popularity skew; 0 is uniform
  double page_coverage_pct = 100.0;   // fraction of a page's 64 lines that are ever touched
  double mean_compute_gap = 20.0;     // instructions between memory operations
  uint64_t seed = 1;

  // Throws TraceError on an invalid combination.
  void validate() const;
  void set(std::string_view key, std::string_view value);
  std::string dump() const;

  // Number of distinct lines a touched page exposes.
  uint32_t lines_per_page() const;
};

WorkloadSpec load_workload_spec(const std::filesystem::path& path);

// Produces one trace per thread. Deterministic for a fixed spec.
std::vector<ThreadTrace> generate_synthetic(const WorkloadSpec& spec);

TraceSet generate_trace_set(const WorkloadSpec& spec);

}  // namespace cxlsim
