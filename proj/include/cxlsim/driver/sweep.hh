#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cxlsim/sim/config.hh"

namespace cxlsim {

// Cartesian sweep description, one `key = a, b, c` line per axis.
struct SweepSpec {
  std::vector<std::string> variants = {"Full"};
  std::vector<uint32_t> threads = {8};
  std::vector<std::string> flash_profiles = {"ULL"};
  std::vector<uint64_t> write_log_sizes;  // empty: keep config value
  std::vector<uint64_t> ssd_cache_sizes;  // empty: keep config value
  std::vector<uint64_t> seeds = {1};
  std::string config;    // base config file, optional
  std::string workload;  // workload spec file (traces generated per combo)
  std::string traces;    // or a fixed trace directory

  void validate() const;
};

struct SweepPoint {
  std::string variant;
  uint32_t threads = 0;
  std::string flash_profile;
  std::optional<uint64_t> write_log_size;
  std::optional<uint64_t> ssd_cache_size;
  uint64_t seed = 0;

  // Stable file stem, e.g. "Full_t8_ULL_log-_cache-_s1".
  std::string stem() const;
};

SweepSpec parse_sweep_spec(const std::filesystem::path& path);
std::vector<SweepPoint> expand(const SweepSpec& spec);

}  // namespace cxlsim
