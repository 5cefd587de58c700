#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cxlsim/metrics/request_class.hh"
#include "cxlsim/sim/sim_time.hh"

namespace cxlsim {

// Power-of-two latency bins: bin 0 is [0, 1) ps, bin k is [2^(k-1), 2^k).
class LatencyHistogram {
 public:
  static constexpr size_t kBins = 64;

  void add(uint64_t ps);
  uint64_t count() const;
  uint64_t bin_count(size_t k) const { return bins_[k]; }
  static uint64_t bin_low(size_t k) { return k == 0 ? 0 : uint64_t{1} << (k - 1); }
  static uint64_t bin_high(size_t k) { return k == 0 ? 1 : (k >= 64 ? UINT64_MAX : uint64_t{1} << k); }

  // Header `bin_low_ps,bin_high_ps,count`, then nonempty bins in order.
  void write_csv(std::ostream& out) const;

 private:
  std::array<uint64_t, kBins> bins_{};
};

// Counts and total latencies of off-chip accesses, by service class.
class AmatCounters {
 public:
  void record(RequestClass c, uint64_t latency_ps);
  void record_squashed() { ++squashed_; }

  uint64_t count(RequestClass c) const { return count_[idx(c)]; }
  uint64_t total_ps(RequestClass c) const { return total_[idx(c)]; }
  uint64_t count() const;
  uint64_t total_ps() const;
  uint64_t squashed() const { return squashed_; }
  // Empty when nothing was recorded.
  std::optional<double> amat_ps() const;
  const LatencyHistogram& histogram() const { return hist_; }

 private:
  static size_t idx(RequestClass c) { return static_cast<size_t>(c); }
  std::array<uint64_t, kRequestClassCount> count_{};
  std::array<uint64_t, kRequestClassCount> total_{};
  uint64_t squashed_ = 0;
  LatencyHistogram hist_;
};

struct CoreTime {
  SimTime idle;
  SimTime switching;
  SimTime running;
  uint64_t compute_cycles = 0;
};

// One result row.
struct RunRecord {
  std::string workload;
  std::string variant;
  uint32_t threads = 0;
  uint64_t seed = 0;
  uint64_t sim_time_ps = 0;
  uint64_t retired_instructions = 0;
  AmatCounters amat;
  uint64_t flash_read_bytes = 0;
  uint64_t flash_write_bytes = 0;
  uint64_t gc_count = 0;
  uint64_t compactions = 0;
  uint64_t ctx_switches = 0;
  uint64_t promotions = 0;
  uint64_t demotions = 0;
  double ssd_bw_utilization = 0.0;
  double memory_bound_frac = 0.0;
  // Trailing extras.
  uint64_t log_stall_writes = 0;
  uint64_t promotions_dropped = 0;
  uint64_t onchip_hits = 0;
};

std::vector<std::string> csv_columns();
std::string csv_header();
std::string csv_row(const RunRecord& r);
// Writes header + one row. Throws std::runtime_error if unwritable.
void write_csv(const std::filesystem::path& path, const RunRecord& r);
// Appends one row, writing the header first when the file is new or empty.
// Throws std::runtime_error when an existing file has a different header.
void append_csv(const std::filesystem::path& path, const RunRecord& r);
void write_histogram_csv(const std::filesystem::path& path, const LatencyHistogram& h);

}  // namespace cxlsim
