#include "cxlsim/driver/system.hh"

#include <stdexcept>
#include <unordered_map>

#include <fmt/core.h>

namespace cxlsim {

System::System(const SimConfig& cfg, TraceSet traces) : cfg_(cfg), traces_(std::move(traces)) {
  cfg_.validate();
  uint64_t footprint = 0;
  for (const auto& t : traces_.threads) {
    validate_trace(t);
    footprint = std::max(footprint, t.footprint_bytes);
  }
  pages_ = (footprint + kPageBytes - 1) / kPageBytes;

  const uint64_t pool = cfg.dram_only ? 0 : cfg.host_dram_size_byte / kPageBytes;
  pt_ = std::make_unique<PageTable>(pages_, pool);
  dram_ = std::make_unique<HostDram>(cfg);
  link_ = std::make_unique<CxlLink>(eq_, cfg);
  flash_ = std::make_unique<FlashBackend>(eq_, cfg);
  ssd_ = std::make_unique<SsdController>(eq_, cfg, *flash_, *link_);
  mig_ = std::make_unique<MigrationManager>(eq_, cfg, *pt_, *link_, *ssd_);
  link_->attach_device([this](const M2SRequest& r) { ssd_->handle(r); });

  if (cfg.dram_only) {
    for (uint64_t vpn = 0; vpn < pages_; ++vpn) pt_->map_host(vpn, pt_->alloc_frame(vpn));
  } else {
    for (uint64_t vpn = 0; vpn < pages_; ++vpn) pt_->map_ssd(vpn);
    flash_->precondition(pages_);
  }

  host_ = std::make_unique<Host>(eq_, cfg, traces_.threads, *pt_, *dram_, *link_,
                                 cfg.dram_only ? nullptr : mig_.get());
  ssd_->set_promotion_trigger([this](uint64_t lpa) { mig_->on_trigger(lpa); });
  mig_->set_tlb_shootdown([this] { host_->tlb_shootdown(); });
}

void System::run() {
  if (ran_) throw std::logic_error("System::run called twice");
  ran_ = true;
  host_->start();
  eq_.run();
  if (!host_->all_done()) {
    throw std::runtime_error(fmt::format("simulation stalled at {} ps with unfinished threads", eq_.now().ps));
  }
}

RunRecord System::record(const std::string& variant) const {
  RunRecord r;
  r.workload = traces_.workload;
  r.variant = variant;
  r.threads = static_cast<uint32_t>(traces_.threads.size());
  r.seed = cfg_.seed;
  const SimTime end = host_->finish_time();
  r.sim_time_ps = end.ps;
  r.retired_instructions = host_->retired_instructions();
  r.amat = host_->amat();
  r.flash_read_bytes = flash_->stats().read_bytes();
  r.flash_write_bytes = flash_->stats().write_bytes();
  r.gc_count = flash_->stats().gc_runs;
  r.compactions = ssd_->stats().compactions;
  r.ctx_switches = host_->stats().ctx_switches;
  r.promotions = mig_->stats().promotions;
  r.demotions = mig_->stats().demotions;
  r.log_stall_writes = ssd_->stats().log_stall_writes;
  r.promotions_dropped = mig_->stats().dropped;
  r.onchip_hits = host_->stats().onchip_hits;

  const auto& ls = link_->stats();
  if (end.ps > 0) {
    double window_s = static_cast<double>(end.ps) * 1e-12;
    r.ssd_bw_utilization =
        static_cast<double>(ls.m2s_bytes + ls.s2m_bytes) / (static_cast<double>(cfg_.cxl_bandwidth_byte_s) * window_s);
  }
  uint64_t total = 0;
  uint64_t mem_bound = 0;
  for (const CoreTime& t : host_->core_times(end)) {
    total += (t.idle + t.switching + t.running).ps;
    uint64_t compute = t.compute_cycles * cfg_.cycle().ps;
    mem_bound += t.running.ps > compute ? t.running.ps - compute : 0;
  }
  r.memory_bound_frac = total ? static_cast<double>(mem_bound) / static_cast<double>(total) : 0.0;
  return r;
}

uint64_t System::read_line(uint64_t vline) const {
  const uint64_t vpn = vline / kLinesPerPage;
  const auto off = static_cast<uint32_t>(vline % kLinesPerPage);
  const PageLocation& loc = pt_->at(vpn);
  if (loc.where == PageLocation::Where::kHostDram) return pt_->frame(loc.id).data[off];
  return ssd_->peek_line(loc.id, off);
}

std::optional<std::string> System::check_memory_image() const {
  std::unordered_map<uint64_t, uint64_t> oracle;
  for (auto [vline, value] : host_->commits()) oracle[vline] = value;
  const uint64_t lines = pages_ * kLinesPerPage;
  for (uint64_t vline = 0; vline < lines; ++vline) {
    auto it = oracle.find(vline);
    uint64_t want = it == oracle.end() ? 0 : it->second;
    uint64_t got = read_line(vline);
    if (got != want) {
      return fmt::format("line {:#x}: simulator holds {:#x}, oracle holds {:#x}", vline * kLineBytes, got, want);
    }
  }
  return std::nullopt;
}

}  // namespace cxlsim
