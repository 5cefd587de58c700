#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cxlsim/sim/sim_time.hh"

namespace cxlsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SchedPolicyKind { kRoundRobin, kRandom, kFairness };
enum class FlashProfile { kUll, kUll2, kSlc, kMlc };

std::string_view to_string(SchedPolicyKind p);
std::string_view to_string(FlashProfile p);
SchedPolicyKind parse_sched_policy(std::string_view s);
FlashProfile parse_flash_profile(std::string_view s);

struct FlashTiming {
  SimTime read;
  SimTime program;
  SimTime erase;
};

FlashTiming flash_timing(FlashProfile p);

constexpr uint64_t kLineBytes = 64;
constexpr uint64_t kPageBytes = 4096;
constexpr uint32_t kLinesPerPage = kPageBytes / kLineBytes;

// Every simulator knob. Defaults are the desk-scale profile: the full-scale
// ratios (flash:SSD DRAM, host pool:SSD DRAM = 4:1, log:cache = 1:7) kept
// while shrinking absolute sizes.
struct SimConfig {
  // CPU
  uint32_t cores = 8;
  uint64_t cpu_freq_mhz = 4000;
  uint32_t window_size = 256;
  uint32_t store_buffer_entries = 64;
  uint64_t private_cache_size_byte = 544 * 1024;
  uint32_t private_cache_way = 32;
  uint32_t private_mshrs = 128;
  uint32_t private_hit_cycles = 4;
  uint64_t llc_size_byte = 16ull << 20;
  uint32_t llc_way = 16;
  uint32_t llc_mshrs = 1024;
  uint32_t llc_hit_cycles = 60;
  bool cache_pollution_on_switch = true;

  // Host DRAM
  uint64_t host_dram_latency_ns = 70;
  uint64_t host_dram_bandwidth_byte_s = 307'200'000'000ull;  // 8 x DDR5-4800
  uint64_t host_dram_size_byte = 64ull << 20;                  // promoted-page pool cap

  // OS
  uint64_t ctx_switch_overhead_ns = 2000;
  SchedPolicyKind t_policy = SchedPolicyKind::kFairness;
  bool device_triggered_ctx_swt = true;
  uint64_t cs_threshold = 2000;  // ns

  // CXL link
  uint64_t cxl_latency_ns = 40;
  uint64_t cxl_bandwidth_byte_s = 16'000'000'000ull;
  uint32_t cxl_tags = 4096;

  // SSD DRAM
  uint64_t ssd_dram_size_byte = 16ull << 20;
  uint64_t write_log_size_byte = 2ull << 20;
  uint64_t ssd_cache_size_byte = 14ull << 20;
  uint32_t ssd_cache_way = 16;
  uint64_t ssd_dram_access_ns = 60;
  uint64_t log_index_lookup_ns = 72;
  uint64_t cache_index_lookup_ns = 49;
  bool write_log_enable = true;

  // Migration
  bool promotion_enable = true;
  uint32_t promotion_threshold = 8;
  uint32_t plb_entries = 64;
  uint32_t migration_copy_window = 64;  // line copies in flight per promotion
  uint64_t tlb_shootdown_ns = 4000;  // aggregate, split across cores

  // Flash
  FlashProfile flash_profile = FlashProfile::kUll;
  uint32_t flash_channels = 16;
  uint32_t chips_per_channel = 8;
  uint32_t dies_per_chip = 8;
  uint32_t planes_per_die = 1;
  uint32_t blocks_per_plane = 4;
  uint32_t pages_per_block = 256;
  double gc_threshold = 0.80;
  uint64_t gc_blocks_to_erase = 614;
  double precondition_fraction = 0.0;

  // Run
  bool dram_only = false;
  uint64_t seed = 1;
  std::string trace_dir;

  SimTime cycle() const { return cycle_time_mhz(cpu_freq_mhz); }
  FlashTiming flash() const { return flash_timing(flash_profile); }

  // Throws ConfigError for an unknown key or a malformed value.
  void set(std::string_view key, std::string_view value);
  // Throws ConfigError when sizes or ratios are inconsistent.
  void validate() const;

  static const std::vector<std::string>& keys();
  std::string get(std::string_view key) const;
  // Serializes every key in keys() order.
  std::string dump() const;
};

// Parses `key = value` lines; `#` starts a comment. Unknown keys are fatal.
SimConfig load_config(const std::filesystem::path& path, SimConfig base = {});
void apply_config_text(SimConfig& cfg, std::string_view text, std::string_view origin = "<text>");

}  // namespace cxlsim
