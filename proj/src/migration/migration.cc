#include "cxlsim/migration/migration.hh"

#include <algorithm>
#include <memory>

namespace cxlsim {

MigrationManager::MigrationManager(EventQueue& eq, const SimConfig& cfg, PageTable& pt, CxlLink& link,
                                   SsdController& ssd)
    : eq_(eq), cfg_(cfg), pt_(pt), link_(link), ssd_(ssd), plb_(cfg.plb_entries) {}

bool MigrationManager::eligible(uint64_t lpa) const {
  return pt_.at(lpa).where == PageLocation::Where::kCxlSsd && !migrating(lpa) && ssd_.resident(lpa);
}

void MigrationManager::on_trigger(uint64_t lpa) {
  if (!cfg_.promotion_enable) return;
  ++stats_.triggers;
  if (!eligible(lpa)) return;
  if (plb_index_.size() >= plb_.size()) {
    if (deferred_set_.insert(lpa).second) {
      deferred_.push_back(lpa);
      ++stats_.deferred;
    }
    return;
  }
  start(lpa);
}

void MigrationManager::start(uint64_t lpa) {
  if (pt_.pool_full() && !demote_one()) {
    ++stats_.dropped;
    return;
  }
  size_t slot = 0;
  while (plb_[slot].valid) ++slot;
  PlbEntry& e = plb_[slot];
  e = PlbEntry{};
  e.valid = true;
  e.lpa = lpa;
  e.frame = pt_.alloc_frame(lpa);
  e.started = eq_.now();
  plb_index_[lpa] = slot;
  ++stats_.promotions_started;
  stats_.max_plb_occupancy = std::max(stats_.max_plb_occupancy, plb_occupancy());
  for (uint32_t i = 0; i < cfg_.migration_copy_window; ++i) issue_copy(slot);
}

void MigrationManager::issue_copy(size_t slot) {
  PlbEntry& e = plb_[slot];
  const uint32_t line = e.next_line++;
  e.line[line] = LineState::kInFlight;
  e.migrated_bitmap |= uint64_t{1} << line;
  M2SRequest req;
  req.kind = M2SKind::kMemRd;
  req.addr = device_addr(e.lpa, line);
  req.purpose = Purpose::kMigration;
  link_.send_request(req, [this, slot, line](const S2MResponse& resp) {
    PlbEntry& pe = plb_[slot];
    if (pe.line[line] == LineState::kInFlight) {
      pt_.frame(pe.frame).data[line] = resp.data;
      pe.line[line] = LineState::kHost;
    } else {
      ++stats_.stale_copies;
    }
    if (pe.next_line < kLinesPerPage) {
      issue_copy(slot);
    } else if (++pe.landed == std::min<uint32_t>(cfg_.migration_copy_window, kLinesPerPage)) {
      complete(slot);
    }
  });
}

void MigrationManager::complete(size_t slot) {
  PlbEntry& e = plb_[slot];
  for (auto s : e.line) {
    if (s != LineState::kHost) throw std::logic_error("promotion completed with uncopied lines");
  }
  pt_.map_host(e.lpa, e.frame);
  auto& fr = pt_.frame(e.frame);
  if (ssd_.drop_promoted_page(e.lpa)) fr.dirty = true;
  fr.last_access = eq_.now().ps;
  promoted_frames_.insert(e.frame);
  if (tlb_) tlb_();
  plb_index_.erase(e.lpa);
  e.valid = false;
  ++stats_.promotions;
  drain_deferred();
}

void MigrationManager::drain_deferred() {
  while (!deferred_.empty() && plb_index_.size() < plb_.size()) {
    uint64_t lpa = deferred_.front();
    deferred_.pop_front();
    deferred_set_.erase(lpa);
    if (eligible(lpa)) start(lpa);
  }
}

bool MigrationManager::demote_one() {
  if (promoted_frames_.empty()) return false;
  uint64_t victim = 0;
  bool found = false;
  uint64_t oldest = 0;
  for (uint64_t f : promoted_frames_) {
    uint64_t t = pt_.frame(f).last_access;
    if (!found || t < oldest || (t == oldest && f < victim)) {
      victim = f;
      oldest = t;
      found = true;
    }
  }
  auto& fr = pt_.frame(victim);
  const uint64_t vpn = fr.vpn;
  M2SRequest req;
  req.kind = M2SKind::kPageInstall;
  req.addr = device_addr(vpn, 0);
  req.page = std::make_shared<const PageData>(fr.data);
  req.dirty = fr.dirty;
  pt_.map_ssd(vpn);
  promoted_frames_.erase(victim);
  pt_.free_frame(victim);
  link_.send_request(req, [](const S2MResponse&) {});
  if (tlb_) tlb_();
  ++stats_.demotions;
  return true;
}

MigrationManager::Route MigrationManager::route_read(uint64_t lpa, uint32_t line) const {
  auto it = plb_index_.find(lpa);
  if (it == plb_index_.end()) return {};
  const PlbEntry& e = plb_[it->second];
  if (e.line[line] == LineState::kHost) return Route{true, e.frame};
  return {};
}

MigrationManager::Route MigrationManager::route_write(uint64_t lpa, uint32_t line) {
  auto it = plb_index_.find(lpa);
  if (it == plb_index_.end()) return {};
  PlbEntry& e = plb_[it->second];
  if (e.line[line] == LineState::kNotCopied) return {};
  e.line[line] = LineState::kHost;
  pt_.frame(e.frame).dirty = true;
  return Route{true, e.frame};
}

void MigrationManager::touch_frame(uint64_t frame, SimTime now) { pt_.frame(frame).last_access = now.ps; }

}  // namespace cxlsim
