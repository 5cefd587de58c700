#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cxlsim/flash/ftl.hh"

namespace cxlsim {

struct PageLocation {
  enum class Where : uint8_t { kUnmapped, kHostDram, kCxlSsd };
  Where where = Where::kUnmapped;
  uint64_t id = 0;  // frame number or LPA
};

// VPN -> location, plus the host frame pool. CXL-SSD pages use LPA = VPN.
class PageTable {
 public:
  struct Frame {
    PageData data{};
    bool in_use = false;
    bool dirty = false;
    uint64_t vpn = 0;
    uint64_t last_access = 0;
  };

  // `pool_frames` == 0 means unbounded.
  PageTable(uint64_t pages, uint64_t pool_frames);

  uint64_t pages() const { return map_.size(); }
  const PageLocation& at(uint64_t vpn) const;

  void map_ssd(uint64_t vpn);
  void map_host(uint64_t vpn, uint64_t frame);

  bool pool_full() const { return pool_cap_ != 0 && used_frames_ >= pool_cap_; }
  uint64_t used_frames() const { return used_frames_; }
  uint64_t pool_capacity() const { return pool_cap_; }

  // Throws std::length_error when the pool is full.
  uint64_t alloc_frame(uint64_t vpn);
  void free_frame(uint64_t frame);
  Frame& frame(uint64_t f) { return frames_.at(f); }
  const Frame& frame(uint64_t f) const { return frames_.at(f); }

 private:
  std::vector<PageLocation> map_;
  std::vector<Frame> frames_;
  std::vector<uint64_t> free_frames_;
  uint64_t pool_cap_;
  uint64_t used_frames_ = 0;
};

}  // namespace cxlsim
