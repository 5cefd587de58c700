#include "cxlsim/driver/sweep.hh"

#include <fstream>

#include <fmt/core.h>

#include "cxlsim/driver/variant.hh"

namespace cxlsim {

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(ws) - b + 1));
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= v.size()) {
    size_t comma = v.find(',', start);
    if (comma == std::string_view::npos) comma = v.size();
    std::string item = trim(v.substr(start, comma - start));
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

uint64_t to_u64(const std::string& s, const std::string& key) {
  try {
    size_t used = 0;
    uint64_t v = std::stoull(s, &used);
    if (used != s.size() || s.front() == '-') throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("sweep key '{}': bad integer '{}'", key, s));
  }
}

}  // namespace

void SweepSpec::validate() const {
  if (variants.empty() || threads.empty() || flash_profiles.empty() || seeds.empty()) {
    throw ConfigError("sweep axes must be nonempty");
  }
  for (const auto& v : variants) variant_knobs(v);
  for (const auto& p : flash_profiles) parse_flash_profile(p);
  for (auto t : threads) {
    if (t == 0) throw ConfigError("sweep thread count must be >= 1");
  }
  if (workload.empty() == traces.empty()) throw ConfigError("sweep needs exactly one of 'workload' or 'traces'");
}

std::string SweepPoint::stem() const {
  return fmt::format("{}_t{}_{}_log{}_cache{}_s{}", variant, threads, flash_profile,
                     write_log_size ? std::to_string(*write_log_size) : "-",
                     ssd_cache_size ? std::to_string(*ssd_cache_size) : "-", seed);
}

SweepSpec parse_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open sweep spec '{}'", path.string()));
  SweepSpec spec;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::string s = trim(line);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected 'key = value'", path.string(), line_no));
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    auto list = split_list(val);
    auto nums = [&] {
      std::vector<uint64_t> out;
      for (const auto& x : list) out.push_back(to_u64(x, key));
      return out;
    };
    if (key == "variants") {
      spec.variants = list;
    } else if (key == "threads") {
      spec.threads.clear();
      for (auto v : nums()) spec.threads.push_back(static_cast<uint32_t>(v));
    } else if (key == "flash_profiles") {
      spec.flash_profiles = list;
    } else if (key == "write_log_sizes") {
      spec.write_log_sizes = nums();
    } else if (key == "ssd_cache_sizes") {
      spec.ssd_cache_sizes = nums();
    } else if (key == "seeds") {
      spec.seeds = nums();
    } else if (key == "config") {
      spec.config = val;
    } else if (key == "workload") {
      spec.workload = val;
    } else if (key == "traces") {
      spec.traces = val;
    } else {
      throw ConfigError(fmt::format("{}:{}: unknown sweep key '{}'", path.string(), line_no, key));
    }
  }
  // Relative paths resolve against the spec's directory.
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (path.parent_path() / p).string();
  };
  resolve(spec.config);
  resolve(spec.workload);
  resolve(spec.traces);
  spec.validate();
  return spec;
}

std::vector<SweepPoint> expand(const SweepSpec& spec) {
  std::vector<std::optional<uint64_t>> logs, caches;
  for (auto v : spec.write_log_sizes) logs.emplace_back(v);
  for (auto v : spec.ssd_cache_sizes) caches.emplace_back(v);
  if (logs.empty()) logs.emplace_back();
  if (caches.empty()) caches.emplace_back();
  std::vector<SweepPoint> out;
  for (const auto& v : spec.variants)
    for (auto t : spec.threads)
      for (const auto& f : spec.flash_profiles)
        for (auto l : logs)
          for (auto c : caches)
            for (auto s : spec.seeds) out.push_back(SweepPoint{v, t, f, l, c, s});
  return out;
}

}  // namespace cxlsim
