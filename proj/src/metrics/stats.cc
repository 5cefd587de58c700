#include "cxlsim/metrics/stats.hh"

#include <bit>
#include <fstream>
#include <stdexcept>

#include <fmt/core.h>
#include <fmt/ostream.h>

namespace cxlsim {

void LatencyHistogram::add(uint64_t ps) {
  size_t k = ps == 0 ? 0 : static_cast<size_t>(std::bit_width(ps));
  bins_[std::min(k, kBins - 1)] += 1;
}

uint64_t LatencyHistogram::count() const {
  uint64_t n = 0;
  for (auto b : bins_) n += b;
  return n;
}

void LatencyHistogram::write_csv(std::ostream& out) const {
  out << "bin_low_ps,bin_high_ps,count\n";
  for (size_t k = 0; k < kBins; ++k) {
    if (bins_[k] != 0) fmt::print(out, "{},{},{}\n", bin_low(k), bin_high(k), bins_[k]);
  }
}

void AmatCounters::record(RequestClass c, uint64_t latency_ps) {
  ++count_[idx(c)];
  total_[idx(c)] += latency_ps;
  hist_.add(latency_ps);
}

uint64_t AmatCounters::count() const {
  uint64_t n = 0;
  for (auto c : count_) n += c;
  return n;
}

uint64_t AmatCounters::total_ps() const {
  uint64_t n = 0;
  for (auto t : total_) n += t;
  return n;
}

std::optional<double> AmatCounters::amat_ps() const {
  uint64_t n = count();
  if (n == 0) return std::nullopt;
  return static_cast<double>(total_ps()) / static_cast<double>(n);
}

std::vector<std::string> csv_columns() {
  std::vector<std::string> cols = {"workload", "variant", "threads", "seed", "sim_time_ps", "retired_instructions"};
  for (auto c : kAllRequestClasses) {
    cols.push_back(fmt::format("{}_count", column_stem(c)));
    cols.push_back(fmt::format("{}_latency_ps", column_stem(c)));
  }
  for (const char* c : {"amat_ps", "flash_read_bytes", "flash_write_bytes", "gc_count", "compactions",
                        "ctx_switches", "promotions", "demotions", "ssd_bw_utilization", "memory_bound_frac",
                        "squashed_accesses", "log_stall_writes", "promotions_dropped", "onchip_hits"}) {
    cols.emplace_back(c);
  }
  return cols;
}

std::string csv_header() {
  std::string out;
  for (const auto& c : csv_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string csv_row(const RunRecord& r) {
  std::string out = fmt::format("{},{},{},{},{},{}", r.workload, r.variant, r.threads, r.seed, r.sim_time_ps,
                                r.retired_instructions);
  for (auto c : kAllRequestClasses) out += fmt::format(",{},{}", r.amat.count(c), r.amat.total_ps(c));
  auto amat = r.amat.amat_ps();
  out += amat ? fmt::format(",{:.3f}", *amat) : std::string(",");
  out += fmt::format(",{},{},{},{},{},{},{},{:.6f},{:.6f},{},{},{},{}", r.flash_read_bytes, r.flash_write_bytes,
                     r.gc_count, r.compactions, r.ctx_switches, r.promotions, r.demotions, r.ssd_bw_utilization,
                     r.memory_bound_frac, r.amat.squashed(), r.log_stall_writes, r.promotions_dropped,
                     r.onchip_hits);
  return out;
}

void write_csv(const std::filesystem::path& path, const RunRecord& r) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << csv_header() << '\n' << csv_row(r) << '\n';
  if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

void append_csv(const std::filesystem::path& path, const RunRecord& r) {
  bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (!fresh) {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    if (header != csv_header()) {
      throw std::runtime_error(fmt::format("'{}' has a different CSV header", path.string()));
    }
  } else if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  if (fresh) out << csv_header() << '\n';
  out << csv_row(r) << '\n';
  if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

void write_histogram_csv(const std::filesystem::path& path, const LatencyHistogram& h) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  h.write_csv(out);
}

}  // namespace cxlsim
