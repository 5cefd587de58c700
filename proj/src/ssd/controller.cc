#include "cxlsim/ssd/controller.hh"

#include <fmt/core.h>

namespace cxlsim {

SsdController::SsdController(EventQueue& eq, const SimConfig& cfg, FlashBackend& flash, CxlLink& link)
    : eq_(eq),
      cfg_(cfg),
      flash_(flash),
      link_(link),
      log_(cfg.write_log_enable ? std::make_unique<WriteLog>(cfg.write_log_size_byte) : nullptr),
      // Without the log the whole SSD DRAM serves as data cache.
      cache_(cfg.write_log_enable ? cfg.ssd_cache_size_byte : cfg.ssd_dram_size_byte, cfg.ssd_cache_way),
      lookup_cost_(SimTime::from_ns(cfg.write_log_enable
                                        ? std::max(cfg.log_index_lookup_ns, cfg.cache_index_lookup_ns)
                                        : cfg.cache_index_lookup_ns) +
                   SimTime::from_ns(cfg.ssd_dram_access_ns)),
      dram_access_(SimTime::from_ns(cfg.ssd_dram_access_ns)) {}

bool SsdController::idle() const {
  return pending_.empty() && !compacting_ && stalled_writes_.empty() && !flash_.gc_active();
}

bool SsdController::resident(uint64_t lpa) const { return !host_owned(lpa) && cache_.find(lpa) != nullptr; }

uint64_t SsdController::peek_line(uint64_t lpa, uint32_t page_offset) const {
  if (log_) {
    if (auto v = log_->lookup(lpa, page_offset)) return *v;
  }
  if (const CachePage* p = cache_.find(lpa)) return p->data[page_offset];
  return flash_.content(lpa)[page_offset];
}

void SsdController::respond_at(SimTime at, S2MResponse resp) {
  eq_.schedule(at, [this, resp] { link_.send_response(resp); }, ComponentId::kSsd);
}

void SsdController::handle(const M2SRequest& req) {
  switch (req.kind) {
    case M2SKind::kMemRd: handle_read(req); break;
    case M2SKind::kMemWr: handle_write(req); break;
    case M2SKind::kPageInstall: handle_install(req); break;
  }
}

void SsdController::record_access(CachePage& page) {
  cache_.touch(page);
  ++page.hotness;
  if (cfg_.promotion_enable && !page.nominated && page.hotness > cfg_.promotion_threshold) {
    page.nominated = true;
    ++stats_.nominations;
    if (promote_) {
      uint64_t lpa = page.lpa;
      eq_.schedule(eq_.now(), [this, lpa] { promote_(lpa); }, ComponentId::kMigration);
    }
  }
}

void SsdController::handle_read(const M2SRequest& req) {
  const uint64_t lpa = req.lpa();
  const uint32_t off = req.page_offset();
  const bool demand = req.purpose == Purpose::kDemand;
  const SimTime ready = eq_.now() + lookup_cost_;
  if (demand) {
    ++stats_.reads;
  } else {
    ++stats_.migration_reads;
  }

  CachePage* cached = cache_.find(lpa);
  if (cached && demand) record_access(*cached);

  // A write parked behind a full log is the newest version of its line.
  for (auto it = stalled_writes_.rbegin(); it != stalled_writes_.rend(); ++it) {
    if (it->addr == req.addr) {
      ++stats_.log_hits;
      respond_at(ready, S2MResponse::mem_data(req.tag, it->data, RequestClass::kSsdReadHit));
      return;
    }
  }

  if (log_) {
    if (auto v = log_->lookup(lpa, off)) {
      ++stats_.log_hits;
      respond_at(ready, S2MResponse::mem_data(req.tag, *v, RequestClass::kSsdReadHit));
      return;
    }
  }
  if (cached) {
    ++stats_.cache_hits;
    respond_at(ready, S2MResponse::mem_data(req.tag, cached->data[off], RequestClass::kSsdReadHit));
    return;
  }
  auto it = pending_.find(lpa);
  if (demand && !req.no_delay && cfg_.device_triggered_ctx_swt &&
      flash_.should_ctx_switch(lpa, SimTime::from_ns(cfg_.cs_threshold))) {
    // Tell the host to switch away, but fetch the page anyway so the replay
    // finds it in DRAM.
    ++stats_.delay_ndrs;
    respond_at(ready, S2MResponse::delay(req.tag));
    if (it == pending_.end()) start_fetch(lpa);
    return;
  }
  if (it != pending_.end()) {
    ++stats_.fetch_joins;
    it->second.waiters.push_back(Waiter{req});
    return;
  }
  start_fetch(lpa);
  pending_[lpa].waiters.push_back(Waiter{req});
}

void SsdController::handle_write(const M2SRequest& req) {
  const uint64_t lpa = req.lpa();
  if (host_owned(lpa)) {
    throw std::logic_error(fmt::format("device write to promoted page {}", lpa));
  }
  ++stats_.writes;
  if (log_) {
    if (log_->active().full() || !stalled_writes_.empty()) {
      ++stats_.log_stall_writes;
      stalled_writes_.push_back(req);
      return;
    }
    apply_write(req);
    respond_at(eq_.now() + lookup_cost_, S2MResponse::cmp(req.tag));
    maybe_start_compaction();
    return;
  }
  // Write-allocate page cache.
  if (cache_.find(lpa) != nullptr) {
    apply_write(req);
    respond_at(eq_.now() + lookup_cost_, S2MResponse::cmp(req.tag));
    return;
  }
  if (pending_.find(lpa) == pending_.end()) start_fetch(lpa);
  pending_[lpa].waiters.push_back(Waiter{req});
}

void SsdController::apply_write(const M2SRequest& req) {
  const uint64_t lpa = req.lpa();
  const uint32_t off = req.page_offset();
  CachePage* p = cache_.find(lpa);
  if (log_) {
    log_->active().append(lpa, off, req.data);
    ++stats_.log_appends;
    if (p) {
      p->data[off] = req.data;
      record_access(*p);
    }
    return;
  }
  if (!p) throw std::logic_error("write-allocate without a resident page");
  p->data[off] = req.data;
  p->dirty = true;
  record_access(*p);
}

void SsdController::handle_install(const M2SRequest& req) {
  const uint64_t lpa = req.lpa();
  if (!req.page) throw ProtocolError("page install without data");
  host_owned_.erase(lpa);
  ++stats_.installs;
  if (CachePage* p = cache_.find(lpa)) {
    p->data = *req.page;
    p->dirty = p->dirty || req.dirty;
    cache_.touch(*p);
  } else {
    install(lpa, *req.page, req.dirty);
  }
  respond_at(eq_.now() + dram_access_, S2MResponse::cmp(req.tag));
}

CachePage* SsdController::install(uint64_t lpa, const PageData& data, bool dirty) {
  auto ins = cache_.insert(lpa, data, dirty);
  if (ins.victim && ins.victim->dirty) {
    ++stats_.dirty_evictions;
    flash_.program_page(ins.victim->lpa, ins.victim->data);
  }
  return ins.page;
}

void SsdController::start_fetch(uint64_t lpa) {
  ++stats_.flash_fetches;
  pending_.try_emplace(lpa);
  flash_.read_page(lpa, [this, lpa](const PageData& data) { on_fill(lpa, data); });
}

void SsdController::on_fill(uint64_t lpa, const PageData& flash_data) {
  Fetch f = std::move(pending_.at(lpa));
  pending_.erase(lpa);
  const SimTime at = eq_.now() + dram_access_;

  CachePage* page = nullptr;
  PageData scratch{};
  if (host_owned(lpa)) {
    // Promoted while the fetch was in flight; only late readers remain.
    scratch = flash_data;
    if (log_) log_->merge_into(lpa, scratch);
  } else if (CachePage* p = cache_.find(lpa)) {
    page = p;
  } else {
    PageData merged = flash_data;
    if (log_) log_->merge_into(lpa, merged);
    page = install(lpa, merged, false);
  }
  for (const Waiter& w : f.waiters) {
    serve_waiter(w, page ? page->data : scratch, page, at);
  }
}

void SsdController::serve_waiter(const Waiter& w, PageData& data, CachePage* cached, SimTime at) {
  const M2SRequest& req = w.req;
  if (req.kind == M2SKind::kMemWr) {
    if (!cached) throw std::logic_error("buffered write for a page that was not installed");
    apply_write(req);
    respond_at(at, S2MResponse::cmp(req.tag));
    return;
  }
  uint64_t v = data[req.page_offset()];
  if (log_) {
    if (auto lv = log_->lookup(req.lpa(), req.page_offset())) v = *lv;
  }
  if (cached && req.purpose == Purpose::kDemand) record_access(*cached);
  respond_at(at, S2MResponse::mem_data(req.tag, v, RequestClass::kSsdReadMiss));
}

bool SsdController::drop_promoted_page(uint64_t lpa) {
  ++stats_.drops;
  bool newer = false;
  if (log_ && log_->drop(lpa)) newer = true;
  if (auto p = cache_.erase(lpa); p && p->dirty) newer = true;
  host_owned_.insert(lpa);
  return newer;
}

void SsdController::maybe_start_compaction() {
  if (log_ && log_->active().full() && !compacting_) start_compaction();
}

void SsdController::start_compaction() {
  log_->swap();
  compacting_ = true;
  ++stats_.compactions;
  const LogBuffer& sealed = log_->compacting();
  // Hold one reference so the batch cannot finish while it is being issued.
  compaction_outstanding_ = 1;
  for (uint64_t lpa : sealed.index().lpas()) {
    ++compaction_outstanding_;
    if (CachePage* p = cache_.find(lpa)) {
      // L2: the cached page already carries every logged line.
      ++stats_.compaction_programs;
      p->dirty = false;
      flash_.program_page(lpa, p->data, [this] { compaction_step_done(); });
      continue;
    }
    // L3-L5: read, merge, program.
    ++stats_.compaction_reads;
    flash_.read_page(lpa, [this, lpa](const PageData& data) {
      if (!log_->compacting().index().contains(lpa)) {
        ++stats_.compaction_skips;
        compaction_step_done();
        return;
      }
      PageData merged = data;
      log_->compacting().merge_into(lpa, merged);
      ++stats_.compaction_programs;
      flash_.program_page(lpa, merged, [this] { compaction_step_done(); });
    });
  }
  compaction_step_done();
}

void SsdController::compaction_step_done() {
  if (--compaction_outstanding_ == 0) finish_compaction();
}

void SsdController::finish_compaction() {
  log_->compacting().reset();
  compacting_ = false;
  while (!stalled_writes_.empty()) {
    if (log_->active().full()) {
      if (compacting_) break;
      start_compaction();
      continue;
    }
    M2SRequest req = stalled_writes_.front();
    stalled_writes_.pop_front();
    // Promoted meanwhile: the migration copy already carried this value.
    if (!host_owned(req.lpa())) apply_write(req);
    respond_at(eq_.now() + lookup_cost_, S2MResponse::cmp(req.tag));
  }
  maybe_start_compaction();
}

}  // namespace cxlsim
