#include "cxlsim/trace/workload.hh"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/core.h>

#include "cxlsim/sim/config.hh"
#include "cxlsim/sim/rng.hh"

namespace cxlsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  try {
    size_t used = 0;
    std::string s(v);
    double d = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw TraceError(fmt::format("workload key '{}': bad number '{}'", key, v));
  }
}

uint64_t to_uint(std::string_view key, std::string_view v) {
  try {
    size_t used = 0;
    std::string s(v);
    if (!s.empty() && s.front() == '-') throw std::invalid_argument("negative");
    unsigned long long d = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw TraceError(fmt::format("workload key '{}': bad unsigned integer '{}'", key, v));
  }
}

// Samples page ranks from Zipf(theta) over `n` pages by inverting the CDF.
class ZipfSampler {
 public:
  ZipfSampler(uint64_t n, double theta) : cdf_(n) {
    double sum = 0.0;
    for (uint64_t k = 0; k < n; ++k) {
      sum += 1.0 / std::pow(static_cast<double>(k + 1), theta);
      cdf_[k] = sum;
    }
    for (auto& c : cdf_) c /= sum;
    cdf_.back() = 1.0;
  }

  uint64_t sample(Rng& rng) const {
    double u = rng.uniform01();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<uint64_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

uint32_t WorkloadSpec::lines_per_page() const {
  auto n = static_cast<uint32_t>(std::lround(64.0 * page_coverage_pct / 100.0));
  return std::clamp<uint32_t>(n, 1, kLinesPerPage);
}

void WorkloadSpec::validate() const {
  if (footprint_bytes == 0) throw TraceError("workload footprint_bytes must be nonzero");
  if (footprint_bytes % kPageBytes != 0) throw TraceError("workload footprint_bytes must be a multiple of 4096");
  if (thread_count == 0) throw TraceError("workload thread_count must be >= 1");
  if (ops_per_thread == 0) throw TraceError("workload ops_per_thread must be nonzero");
  if (!(write_ratio >= 0.0 && write_ratio <= 1.0)) throw TraceError("workload write_ratio must be in [0, 1]");
  if (!(zipf_theta >= 0.0)) throw TraceError("workload zipf_theta must be >= 0");
  if (!(page_coverage_pct > 0.0 && page_coverage_pct <= 100.0)) {
    throw TraceError("workload page_coverage_pct must be in (0, 100]");
  }
  if (!(mean_compute_gap >= 0.0)) throw TraceError("workload mean_compute_gap must be >= 0");
}

void WorkloadSpec::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "name") name = std::string(value);
  else if (key == "footprint_bytes") footprint_bytes = to_uint(key, value);
  else if (key == "thread_count") thread_count = static_cast<uint32_t>(to_uint(key, value));
  else if (key == "ops_per_thread") ops_per_thread = to_uint(key, value);
  else if (key == "write_ratio") write_ratio = to_double(key, value);
  else if (key == "zipf_theta") zipf_theta = to_double(key, value);
  else if (key == "page_coverage_pct") page_coverage_pct = to_double(key, value);
  else if (key == "mean_compute_gap") mean_compute_gap = to_double(key, value);
  else if (key == "seed") seed = to_uint(key, value);
  else throw TraceError(fmt::format("unknown workload key '{}'", key));
}

std::string WorkloadSpec::dump() const {
  return fmt::format(
      "name = {}\nfootprint_bytes = {}\nthread_count = {}\nops_per_thread = {}\nwrite_ratio = {}\n"
      "zipf_theta = {}\npage_coverage_pct = {}\nmean_compute_gap = {}\nseed = {}\n",
      name, footprint_bytes, thread_count, ops_per_thread, write_ratio, zipf_theta, page_coverage_pct,
      mean_compute_gap, seed);
}

WorkloadSpec load_workload_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceError(fmt::format("cannot open workload spec '{}'", path.string()));
  WorkloadSpec spec;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
    s = trim(s);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw TraceError(fmt::format("{}:{}: expected 'key = value'", path.string(), line_no));
    }
    try {
      spec.set(trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const TraceError& e) {
      throw TraceError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  spec.validate();
  return spec;
}

std::vector<ThreadTrace> generate_synthetic(const WorkloadSpec& spec) {
  spec.validate();
  const uint64_t pages = spec.footprint_bytes / kPageBytes;
  const uint32_t lines = spec.lines_per_page();

  // Popularity rank -> page, so hot pages are scattered over the footprint.
  std::vector<uint64_t> rank_to_page(pages);
  std::iota(rank_to_page.begin(), rank_to_page.end(), 0);
  {
    Rng perm(mix_seed(spec.seed, 0x5045524dULL));
    std::shuffle(rank_to_page.begin(), rank_to_page.end(), perm.engine());
  }
  ZipfSampler zipf(pages, spec.zipf_theta);

  // Per-page subset of touched line slots, drawn lazily from a page-keyed
  // stream so every thread sees the same subset.
  std::vector<std::array<uint8_t, kLinesPerPage>> slots(pages);
  std::vector<bool> slots_ready(pages, false);
  auto line_of = [&](uint64_t page, Rng& rng) -> uint64_t {
    if (!slots_ready[page]) {
      std::array<uint8_t, kLinesPerPage> all{};
      std::iota(all.begin(), all.end(), 0);
      Rng prng(mix_seed(spec.seed ^ 0x4c494e45ULL, page));
      for (uint32_t i = 0; i < lines; ++i) std::swap(all[i], all[i + prng.below(kLinesPerPage - i)]);
      slots[page] = all;
      slots_ready[page] = true;
    }
    return slots[page][rng.below(lines)];
  };

  std::vector<ThreadTrace> out(spec.thread_count);
  for (uint32_t t = 0; t < spec.thread_count; ++t) {
    Rng rng(mix_seed(spec.seed, t + 1));
    ThreadTrace& tr = out[t];
    tr.thread_id = t;
    tr.footprint_bytes = spec.footprint_bytes;
    tr.ops.reserve(spec.ops_per_thread * 2);
    for (uint64_t i = 0; i < spec.ops_per_thread; ++i) {
      uint64_t gap = rng.geometric(spec.mean_compute_gap);
      while (gap > 0) {
        auto chunk = static_cast<uint32_t>(std::min<uint64_t>(gap, UINT32_MAX));
        tr.ops.push_back(TraceOp::compute(chunk));
        gap -= chunk;
      }
      uint64_t page = rank_to_page[zipf.sample(rng)];
      uint64_t vaddr = page * kPageBytes + line_of(page, rng) * kLineBytes;
      bool is_write = rng.bernoulli(spec.write_ratio);
      tr.ops.push_back(is_write ? TraceOp::write(vaddr) : TraceOp::read(vaddr));
    }
  }
  return out;
}

TraceSet generate_trace_set(const WorkloadSpec& spec) {
  return TraceSet{spec.name, generate_synthetic(spec)};
}

}  // namespace cxlsim
