#include "cxlsim/sim/config.hh"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/core.h>

namespace cxlsim {

std::string_view to_string(SchedPolicyKind p) {
  switch (p) {
    case SchedPolicyKind::kRoundRobin: return "RR";
    case SchedPolicyKind::kRandom: return "RANDOM";
    case SchedPolicyKind::kFairness: return "FAIRNESS";
  }
  return "?";
}

std::string_view to_string(FlashProfile p) {
  switch (p) {
    case FlashProfile::kUll: return "ULL";
    case FlashProfile::kUll2: return "ULL2";
    case FlashProfile::kSlc: return "SLC";
    case FlashProfile::kMlc: return "MLC";
  }
  return "?";
}

SchedPolicyKind parse_sched_policy(std::string_view s) {
  if (s == "RR") return SchedPolicyKind::kRoundRobin;
  if (s == "RANDOM") return SchedPolicyKind::kRandom;
  if (s == "FAIRNESS" || s == "CFS") return SchedPolicyKind::kFairness;
  throw ConfigError(fmt::format("unknown scheduling policy '{}'", s));
}

FlashProfile parse_flash_profile(std::string_view s) {
  if (s == "ULL") return FlashProfile::kUll;
  if (s == "ULL2") return FlashProfile::kUll2;
  if (s == "SLC") return FlashProfile::kSlc;
  if (s == "MLC") return FlashProfile::kMlc;
  throw ConfigError(fmt::format("unknown flash profile '{}'", s));
}

FlashTiming flash_timing(FlashProfile p) {
  switch (p) {
    case FlashProfile::kUll: return {SimTime::from_us(3), SimTime::from_us(100), SimTime::from_us(1000)};
    case FlashProfile::kUll2: return {SimTime::from_us(4), SimTime::from_us(75), SimTime::from_us(850)};
    case FlashProfile::kSlc: return {SimTime::from_us(25), SimTime::from_us(200), SimTime::from_us(1500)};
    case FlashProfile::kMlc: return {SimTime::from_us(50), SimTime::from_us(600), SimTime::from_us(3000)};
  }
  return {};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_uint(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(fmt::format("key '{}': expected unsigned integer, got '{}'", key, v));
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    size_t used = 0;
    std::string s(v);
    double d = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("key '{}': expected number, got '{}'", key, v));
  }
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(fmt::format("key '{}': expected boolean, got '{}'", key, v));
}

struct Field {
  std::function<void(SimConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const SimConfig&)> get;
};

template <typename T>
Field uint_field(T SimConfig::*m) {
  return {[m](SimConfig& c, std::string_view k, std::string_view v) { c.*m = parse_uint<T>(k, v); },
          [m](const SimConfig& c) { return std::to_string(c.*m); }};
}

Field bool_field(bool SimConfig::*m) {
  return {[m](SimConfig& c, std::string_view k, std::string_view v) { c.*m = parse_bool(k, v); },
          [m](const SimConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field double_field(double SimConfig::*m) {
  return {[m](SimConfig& c, std::string_view k, std::string_view v) { c.*m = parse_double(k, v); },
          [m](const SimConfig& c) { return fmt::format("{}", c.*m); }};
}

// Ordered so that dump() is stable.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"cores", uint_field(&SimConfig::cores)},
      {"cpu_freq_mhz", uint_field(&SimConfig::cpu_freq_mhz)},
      {"window_size", uint_field(&SimConfig::window_size)},
      {"store_buffer_entries", uint_field(&SimConfig::store_buffer_entries)},
      {"private_cache_size_byte", uint_field(&SimConfig::private_cache_size_byte)},
      {"private_cache_way", uint_field(&SimConfig::private_cache_way)},
      {"private_mshrs", uint_field(&SimConfig::private_mshrs)},
      {"private_hit_cycles", uint_field(&SimConfig::private_hit_cycles)},
      {"llc_size_byte", uint_field(&SimConfig::llc_size_byte)},
      {"llc_way", uint_field(&SimConfig::llc_way)},
      {"llc_mshrs", uint_field(&SimConfig::llc_mshrs)},
      {"llc_hit_cycles", uint_field(&SimConfig::llc_hit_cycles)},
      {"cache_pollution_on_switch", bool_field(&SimConfig::cache_pollution_on_switch)},
      {"host_dram_latency_ns", uint_field(&SimConfig::host_dram_latency_ns)},
      {"host_dram_bandwidth_byte_s", uint_field(&SimConfig::host_dram_bandwidth_byte_s)},
      {"host_dram_size_byte", uint_field(&SimConfig::host_dram_size_byte)},
      {"ctx_switch_overhead_ns", uint_field(&SimConfig::ctx_switch_overhead_ns)},
      {"t_policy",
       {[](SimConfig& c, std::string_view, std::string_view v) { c.t_policy = parse_sched_policy(v); },
        [](const SimConfig& c) { return std::string(to_string(c.t_policy)); }}},
      {"device_triggered_ctx_swt", bool_field(&SimConfig::device_triggered_ctx_swt)},
      {"cs_threshold", uint_field(&SimConfig::cs_threshold)},
      {"cxl_latency_ns", uint_field(&SimConfig::cxl_latency_ns)},
      {"cxl_bandwidth_byte_s", uint_field(&SimConfig::cxl_bandwidth_byte_s)},
      {"cxl_tags", uint_field(&SimConfig::cxl_tags)},
      {"ssd_dram_size_byte", uint_field(&SimConfig::ssd_dram_size_byte)},
      {"write_log_size_byte", uint_field(&SimConfig::write_log_size_byte)},
      {"ssd_cache_size_byte", uint_field(&SimConfig::ssd_cache_size_byte)},
      {"ssd_cache_way", uint_field(&SimConfig::ssd_cache_way)},
      {"ssd_dram_access_ns", uint_field(&SimConfig::ssd_dram_access_ns)},
      {"log_index_lookup_ns", uint_field(&SimConfig::log_index_lookup_ns)},
      {"cache_index_lookup_ns", uint_field(&SimConfig::cache_index_lookup_ns)},
      {"write_log_enable", bool_field(&SimConfig::write_log_enable)},
      {"promotion_enable", bool_field(&SimConfig::promotion_enable)},
      {"promotion_threshold", uint_field(&SimConfig::promotion_threshold)},
      {"plb_entries", uint_field(&SimConfig::plb_entries)},
      {"migration_copy_window", uint_field(&SimConfig::migration_copy_window)},
      {"tlb_shootdown_ns", uint_field(&SimConfig::tlb_shootdown_ns)},
      {"flash_profile",
       {[](SimConfig& c, std::string_view, std::string_view v) { c.flash_profile = parse_flash_profile(v); },
        [](const SimConfig& c) { return std::string(to_string(c.flash_profile)); }}},
      {"flash_channels", uint_field(&SimConfig::flash_channels)},
      {"chips_per_channel", uint_field(&SimConfig::chips_per_channel)},
      {"dies_per_chip", uint_field(&SimConfig::dies_per_chip)},
      {"planes_per_die", uint_field(&SimConfig::planes_per_die)},
      {"blocks_per_plane", uint_field(&SimConfig::blocks_per_plane)},
      {"pages_per_block", uint_field(&SimConfig::pages_per_block)},
      {"gc_threshold", double_field(&SimConfig::gc_threshold)},
      {"gc_blocks_to_erase", uint_field(&SimConfig::gc_blocks_to_erase)},
      {"precondition_fraction", double_field(&SimConfig::precondition_fraction)},
      {"dram_only", bool_field(&SimConfig::dram_only)},
      {"seed", uint_field(&SimConfig::seed)},
      {"trace_dir",
       {[](SimConfig& c, std::string_view, std::string_view v) { c.trace_dir = std::string(v); },
        [](const SimConfig& c) { return c.trace_dir; }}},
  };
  return table;
}

const Field& find_field(std::string_view key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

}  // namespace

void SimConfig::set(std::string_view key, std::string_view value) {
  find_field(key).set(*this, key, trim(value));
}

std::string SimConfig::get(std::string_view key) const { return find_field(key).get(*this); }

const std::vector<std::string>& SimConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string SimConfig::dump() const {
  std::string out;
  for (const auto& [name, f] : fields()) out += fmt::format("{} = {}\n", name, f.get(*this));
  return out;
}

void SimConfig::validate() const {
  auto require = [](bool ok, std::string msg) {
    if (!ok) throw ConfigError(std::move(msg));
  };
  require(cores >= 1 && cores <= 64, "cores must be in [1, 64]");
  require(cpu_freq_mhz > 0 && 1'000'000 % cpu_freq_mhz == 0,
          "cpu_freq_mhz must divide 1e6 so a cycle is a whole number of picoseconds");
  require(window_size >= 1, "window_size must be >= 1");
  require(store_buffer_entries >= 1, "store_buffer_entries must be >= 1");
  for (auto [name, size] : {std::pair{"private_cache_size_byte", private_cache_size_byte},
                            std::pair{"llc_size_byte", llc_size_byte},
                            std::pair{"host_dram_size_byte", host_dram_size_byte},
                            std::pair{"ssd_dram_size_byte", ssd_dram_size_byte},
                            std::pair{"write_log_size_byte", write_log_size_byte},
                            std::pair{"ssd_cache_size_byte", ssd_cache_size_byte}}) {
    require(size % kLineBytes == 0, fmt::format("{} must be a multiple of 64", name));
  }
  require(private_cache_way >= 1 && private_cache_size_byte % (private_cache_way * kLineBytes) == 0 &&
              private_cache_size_byte > 0,
          "private_cache_size_byte must be divisible by private_cache_way * 64");
  require(llc_way >= 1 && llc_size_byte % (llc_way * kLineBytes) == 0 && llc_size_byte > 0,
          "llc_size_byte must be divisible by llc_way * 64");
  require(ssd_cache_way >= 1 && ssd_cache_size_byte % (ssd_cache_way * kPageBytes) == 0,
          "ssd_cache_size_byte must be divisible by ssd_cache_way * 4096");
  require(ssd_dram_size_byte % (ssd_cache_way * kPageBytes) == 0,
          "ssd_dram_size_byte must be divisible by ssd_cache_way * 4096");
  require(write_log_size_byte + ssd_cache_size_byte <= ssd_dram_size_byte,
          "write_log_size_byte + ssd_cache_size_byte must not exceed ssd_dram_size_byte");
  require(!write_log_enable || write_log_size_byte >= 2 * kLineBytes,
          "write_log_size_byte must hold at least one entry per buffer");
  require(write_log_size_byte / 2 / kLineBytes < (1ull << 26),
          "write log buffers are limited to 2^26 entries (26-bit log offsets)");
  require(host_dram_size_byte % kPageBytes == 0, "host_dram_size_byte must be a multiple of 4096");
  require(private_mshrs >= 1 && llc_mshrs >= 1, "MSHR capacities must be >= 1");
  require(cxl_tags >= 1 && cxl_tags <= 65536, "cxl_tags must fit the 16-bit tag space");
  require(cxl_bandwidth_byte_s > 0 && host_dram_bandwidth_byte_s > 0, "bandwidths must be positive");
  require(host_dram_latency_ns > 0, "host_dram_latency_ns must be positive");
  require(plb_entries >= 1, "plb_entries must be >= 1");
  require(migration_copy_window >= 1 && migration_copy_window <= 64, "migration_copy_window must be in [1, 64]");
  require(flash_channels >= 1 && chips_per_channel >= 1 && dies_per_chip >= 1 && planes_per_die >= 1 &&
              blocks_per_plane >= 1 && pages_per_block >= 1,
          "flash geometry fields must be >= 1");
  require(gc_threshold > 0.0 && gc_threshold <= 1.0, "gc_threshold must be in (0, 1]");
  require(precondition_fraction >= 0.0 && precondition_fraction < 1.0,
          "precondition_fraction must be in [0, 1)");
}

void apply_config_text(SimConfig& cfg, std::string_view text, std::string_view origin) {
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
    }
  }
}

SimConfig load_config(const std::filesystem::path& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(base, ss.str(), path.string());
  return base;
}

}  // namespace cxlsim
