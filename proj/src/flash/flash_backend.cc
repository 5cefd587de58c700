#include "cxlsim/flash/flash_backend.hh"

#include <cmath>

#include <fmt/core.h>

namespace cxlsim {

SimTime ChannelQueue::enqueue(FlashCmdKind kind, std::function<void()> done, bool gc) {
  SimTime lat;
  switch (kind) {
    case FlashCmdKind::kRead: lat = timing_.read; ++num_read_; break;
    case FlashCmdKind::kProgram: lat = timing_.program; ++num_write_; break;
    case FlashCmdKind::kErase: lat = timing_.erase; ++num_erase_; break;
  }
  if (gc) ++gc_outstanding_;
  SimTime finish = max(eq_->now(), busy_until_) + lat;
  busy_until_ = finish;
  eq_->schedule(
      finish,
      [this, kind, gc, done = std::move(done)] {
        switch (kind) {
          case FlashCmdKind::kRead: --num_read_; break;
          case FlashCmdKind::kProgram: --num_write_; break;
          case FlashCmdKind::kErase: --num_erase_; break;
        }
        if (gc) --gc_outstanding_;
        if (done) done();
      },
      ComponentId::kFlash);
  return finish;
}

SimTime ChannelQueue::estimate_delay() const {
  return timing_.read * (uint64_t{num_read_} + 1) + timing_.program * num_write_ + timing_.erase * num_erase_;
}

FlashBackend::FlashBackend(EventQueue& eq, const SimConfig& cfg)
    : eq_(eq), cfg_(cfg), timing_(cfg.flash()), ftl_(FlashGeometry::from(cfg)) {
  channels_.reserve(ftl_.geometry().channels);
  for (uint32_t c = 0; c < ftl_.geometry().channels; ++c) channels_.emplace_back(eq, timing_);
}

void FlashBackend::precondition(uint64_t lpa_count) {
  const auto& g = ftl_.geometry();
  uint64_t usable = static_cast<uint64_t>(std::floor(g.total_pages() * cfg_.gc_threshold));
  if (lpa_count > usable) {
    throw FlashError(fmt::format("footprint of {} pages exceeds the {} pages usable below the GC threshold",
                                 lpa_count, usable));
  }
  for (uint64_t lpa = 0; lpa < lpa_count; ++lpa) ftl_.write(lpa, ftl_.next_write_channel());
  auto target = static_cast<uint64_t>(std::floor(g.total_blocks() * cfg_.precondition_fraction));
  uint64_t used = g.total_blocks() - ftl_.free_blocks();
  if (target > used) ftl_.fill_invalid_blocks(target - used);
}

uint32_t FlashBackend::channel_of(uint64_t lpa) const {
  auto ppa = ftl_.translate(lpa);
  if (!ppa) throw FlashError(fmt::format("LPA {} is not mapped", lpa));
  return ftl_.channel_of_ppa(*ppa);
}

SimTime FlashBackend::estimate_delay(uint64_t lpa) const { return channels_[channel_of(lpa)].estimate_delay(); }

bool FlashBackend::should_ctx_switch(uint64_t lpa, SimTime threshold) const {
  if (!ftl_.mapped(lpa)) return false;
  const auto& ch = channels_[channel_of(lpa)];
  return ch.estimate_delay() > threshold || ch.gc_in_progress();
}

PageData FlashBackend::content(uint64_t lpa) const {
  auto it = content_.find(lpa);
  return it == content_.end() ? PageData{} : it->second;
}

void FlashBackend::read_page(uint64_t lpa, ReadDone done) {
  if (!ftl_.mapped(lpa)) {
    ++stats_.zero_reads;
    eq_.schedule(eq_.now(), [done = std::move(done)] { done(PageData{}); }, ComponentId::kFlash);
    return;
  }
  ++stats_.reads;
  channels_[channel_of(lpa)].enqueue(FlashCmdKind::kRead,
                                     [this, lpa, done = std::move(done)] { done(content(lpa)); });
}

void FlashBackend::program_page(uint64_t lpa, const PageData& data, Done done) {
  uint32_t ppa = ftl_.write(lpa, ftl_.next_write_channel());
  content_[lpa] = data;
  ++stats_.programs;
  channels_[ftl_.channel_of_ppa(ppa)].enqueue(FlashCmdKind::kProgram, std::move(done));
  maybe_start_gc();
}

void FlashBackend::maybe_start_gc() {
  if (gc_pending_ > 0 || ftl_.used_fraction() < cfg_.gc_threshold) return;
  auto victims = ftl_.pick_victims(cfg_.gc_blocks_to_erase);
  if (victims.empty()) throw FlashError("GC found no reclaimable block; flash is overfull");
  ++stats_.gc_runs;
  // Remapping happens now; the copies and erases then occupy the queues.
  for (uint32_t b : victims) {
    const uint32_t ppb = ftl_.geometry().pages_per_block;
    const uint32_t src_ch = ftl_.channel_of_block(b);
    // Keep one block of headroom for the frontier.
    if (ftl_.free_page_count() < uint64_t{ftl_.valid_pages(b)} + ppb) break;
    for (uint32_t p = 0; p < ppb && ftl_.valid_pages(b) > 0; ++p) {
      uint32_t lpa = ftl_.lpa_at(b * ppb + p);
      if (lpa == Ftl::kUnmapped) continue;
      uint32_t dst = ftl_.write(lpa, src_ch);
      ++stats_.reads;
      ++stats_.programs;
      ++stats_.gc_copies;
      gc_pending_ += 2;
      channels_[src_ch].enqueue(FlashCmdKind::kRead, [this] { gc_command_done(); }, true);
      channels_[ftl_.channel_of_ppa(dst)].enqueue(FlashCmdKind::kProgram, [this] { gc_command_done(); }, true);
    }
    ftl_.begin_erase(b);
    ++stats_.erases;
    ++gc_pending_;
    channels_[src_ch].enqueue(FlashCmdKind::kErase, [this, b] {
      ftl_.finish_erase(b);
      gc_command_done();
    }, true);
  }
  if (gc_pending_ == 0) throw FlashError("GC cannot make progress; flash is overfull");
}

void FlashBackend::gc_command_done() {
  if (--gc_pending_ == 0) maybe_start_gc();
}

}  // namespace cxlsim
