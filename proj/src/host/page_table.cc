#include "cxlsim/host/page_table.hh"

#include <fmt/core.h>

namespace cxlsim {

PageTable::PageTable(uint64_t pages, uint64_t pool_frames) : map_(pages), pool_cap_(pool_frames) {}

const PageLocation& PageTable::at(uint64_t vpn) const {
  if (vpn >= map_.size() || map_[vpn].where == PageLocation::Where::kUnmapped) {
    throw std::out_of_range(fmt::format("access to unmapped VPN {}", vpn));
  }
  return map_[vpn];
}

void PageTable::map_ssd(uint64_t vpn) { map_.at(vpn) = PageLocation{PageLocation::Where::kCxlSsd, vpn}; }

void PageTable::map_host(uint64_t vpn, uint64_t frame) {
  map_.at(vpn) = PageLocation{PageLocation::Where::kHostDram, frame};
}

uint64_t PageTable::alloc_frame(uint64_t vpn) {
  if (pool_full()) throw std::length_error("host page pool is full");
  uint64_t f;
  if (!free_frames_.empty()) {
    f = free_frames_.back();
    free_frames_.pop_back();
  } else {
    f = frames_.size();
    frames_.emplace_back();
  }
  frames_[f] = Frame{};
  frames_[f].in_use = true;
  frames_[f].vpn = vpn;
  ++used_frames_;
  return f;
}

void PageTable::free_frame(uint64_t f) {
  Frame& fr = frames_.at(f);
  if (!fr.in_use) throw std::logic_error(fmt::format("double free of frame {}", f));
  fr = Frame{};
  free_frames_.push_back(f);
  --used_frames_;
}

}  // namespace cxlsim
