#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cxlsim/sim/config.hh"

namespace cxlsim {

// Functional content of one 4KB page: one 64-bit token per 64B line.
using PageData = std::array<uint64_t, kLinesPerPage>;

class FlashError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Die, chip and plane levels are folded into the channel.
struct FlashGeometry {
  uint32_t channels = 16;
  uint32_t blocks_per_channel = 256;
  uint32_t pages_per_block = 256;

  static FlashGeometry from(const SimConfig& cfg);
  uint32_t total_blocks() const { return channels * blocks_per_channel; }
  uint64_t total_pages() const { return uint64_t{total_blocks()} * pages_per_block; }
};

// Page-level mapping with out-of-place updates.
class Ftl {
 public:
  static constexpr uint32_t kUnmapped = UINT32_MAX;
  enum class BlockState : uint8_t { kFree, kOpen, kFull, kErasing };

  explicit Ftl(FlashGeometry geo);

  const FlashGeometry& geometry() const { return geo_; }

  std::optional<uint32_t> translate(uint64_t lpa) const;
  bool mapped(uint64_t lpa) const { return translate(lpa).has_value(); }

  // Programs `lpa` at the next free page, starting the search at `channel`.
  // Invalidates the previous PPA. Throws FlashError when flash is full.
  uint32_t write(uint64_t lpa, uint32_t channel);

  // Channel that the next round-robin write should target; advances.
  uint32_t next_write_channel();

  uint32_t channel_of_ppa(uint32_t ppa) const { return block_of_ppa(ppa) / geo_.blocks_per_channel; }
  uint32_t block_of_ppa(uint32_t ppa) const { return ppa / geo_.pages_per_block; }
  uint32_t channel_of_block(uint32_t block) const { return block / geo_.blocks_per_channel; }
  uint32_t lpa_at(uint32_t ppa) const { return p2l_[ppa]; }
  uint32_t valid_pages(uint32_t block) const { return blocks_[block].valid; }
  BlockState block_state(uint32_t block) const { return blocks_[block].state; }

  // Fraction of blocks that are not free.
  double used_fraction() const;
  uint64_t free_blocks() const { return free_block_count_; }

  // Full blocks ordered by (valid pages, id), limited to `budget`, skipping
  // blocks with every page still valid.
  std::vector<uint32_t> pick_victims(uint64_t budget) const;

  // The caller must have relocated all valid pages first.
  void begin_erase(uint32_t block);
  void finish_erase(uint32_t block);

  // Marks up to `count` free blocks as fully written and fully invalid.
  void fill_invalid_blocks(uint64_t count);

  // Capacity accounting; valid + invalid + free == total pages.
  uint64_t valid_page_count() const { return valid_total_; }
  uint64_t free_page_count() const;
  uint64_t invalid_page_count() const;

  // Cross-checks l2p/p2l and per-block counters. Throws FlashError.
  void check_invariants() const;

 private:
  struct Block {
    BlockState state = BlockState::kFree;
    uint32_t written = 0;
    uint32_t valid = 0;
  };

  uint32_t allocate(uint32_t channel);
  void invalidate(uint32_t ppa);

  FlashGeometry geo_;
  std::vector<uint32_t> l2p_;
  std::vector<uint32_t> p2l_;
  std::vector<Block> blocks_;
  std::vector<std::deque<uint32_t>> free_lists_;
  std::vector<std::optional<uint32_t>> open_block_;
  uint64_t free_block_count_ = 0;
  uint64_t valid_total_ = 0;
  uint32_t rr_channel_ = 0;
};

}  // namespace cxlsim
