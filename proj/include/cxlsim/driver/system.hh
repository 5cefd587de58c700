#pragma once

#include <memory>
#include <optional>
#include <string>

#include "cxlsim/cxl/link.hh"
#include "cxlsim/flash/flash_backend.hh"
#include "cxlsim/host/host.hh"
#include "cxlsim/metrics/stats.hh"
#include "cxlsim/migration/migration.hh"
#include "cxlsim/ssd/controller.hh"
#include "cxlsim/trace/trace.hh"

namespace cxlsim {

// One complete simulated machine. Single use: construct, run(), inspect.
class System {
 public:
  // `cfg` must outlive the System. Traces are copied.
  System(const SimConfig& cfg, TraceSet traces);

  // Runs to quiescence. Throws std::runtime_error when threads never finish.
  void run();

  RunRecord record(const std::string& variant) const;

  // Value of a virtual line in the final memory image.
  uint64_t read_line(uint64_t vline) const;
  // Compares the final image with a flat array replaying the commit order.
  // Returns a description of the first mismatch.
  std::optional<std::string> check_memory_image() const;

  EventQueue& events() { return eq_; }
  const Host& host() const { return *host_; }
  const FlashBackend& flash() const { return *flash_; }
  const SsdController& ssd() const { return *ssd_; }
  const CxlLink& link() const { return *link_; }
  const MigrationManager& migration() const { return *mig_; }
  const PageTable& page_table() const { return *pt_; }
  uint64_t footprint_pages() const { return pages_; }

 private:
  const SimConfig& cfg_;
  TraceSet traces_;
  uint64_t pages_ = 0;
  EventQueue eq_;
  std::unique_ptr<PageTable> pt_;
  std::unique_ptr<HostDram> dram_;
  std::unique_ptr<CxlLink> link_;
  std::unique_ptr<FlashBackend> flash_;
  std::unique_ptr<SsdController> ssd_;
  std::unique_ptr<MigrationManager> mig_;
  std::unique_ptr<Host> host_;
  bool ran_ = false;
};

}  // namespace cxlsim
