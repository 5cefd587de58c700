#include "cxlsim/flash/ftl.hh"

#include <algorithm>

#include <fmt/core.h>

namespace cxlsim {

FlashGeometry FlashGeometry::from(const SimConfig& cfg) {
  FlashGeometry g;
  g.channels = cfg.flash_channels;
  g.blocks_per_channel = cfg.chips_per_channel * cfg.dies_per_chip * cfg.planes_per_die * cfg.blocks_per_plane;
  g.pages_per_block = cfg.pages_per_block;
  return g;
}

Ftl::Ftl(FlashGeometry geo)
    : geo_(geo),
      l2p_(geo.total_pages(), kUnmapped),
      p2l_(geo.total_pages(), kUnmapped),
      blocks_(geo.total_blocks()),
      free_lists_(geo.channels),
      open_block_(geo.channels) {
  if (geo.channels == 0 || geo.blocks_per_channel == 0 || geo.pages_per_block == 0) {
    throw FlashError("flash geometry has a zero dimension");
  }
  if (geo.total_pages() >= kUnmapped) throw FlashError("flash geometry too large for 32-bit PPAs");
  for (uint32_t b = 0; b < geo.total_blocks(); ++b) free_lists_[channel_of_block(b)].push_back(b);
  free_block_count_ = geo.total_blocks();
}

std::optional<uint32_t> Ftl::translate(uint64_t lpa) const {
  if (lpa >= l2p_.size() || l2p_[lpa] == kUnmapped) return std::nullopt;
  return l2p_[lpa];
}

uint32_t Ftl::next_write_channel() {
  uint32_t c = rr_channel_;
  rr_channel_ = (rr_channel_ + 1) % geo_.channels;
  return c;
}

uint32_t Ftl::allocate(uint32_t channel) {
  for (uint32_t i = 0; i < geo_.channels; ++i) {
    uint32_t ch = (channel + i) % geo_.channels;
    if (!open_block_[ch]) {
      if (free_lists_[ch].empty()) continue;
      uint32_t b = free_lists_[ch].front();
      free_lists_[ch].pop_front();
      --free_block_count_;
      blocks_[b].state = BlockState::kOpen;
      open_block_[ch] = b;
    }
    uint32_t b = *open_block_[ch];
    Block& blk = blocks_[b];
    uint32_t ppa = b * geo_.pages_per_block + blk.written;
    if (++blk.written == geo_.pages_per_block) {
      blk.state = BlockState::kFull;
      open_block_[ch].reset();
    }
    return ppa;
  }
  throw FlashError("flash is out of free pages");
}

void Ftl::invalidate(uint32_t ppa) {
  uint32_t b = block_of_ppa(ppa);
  p2l_[ppa] = kUnmapped;
  --blocks_[b].valid;
  --valid_total_;
}

uint32_t Ftl::write(uint64_t lpa, uint32_t channel) {
  if (lpa >= l2p_.size()) {
    throw FlashError(fmt::format("LPA {} beyond flash capacity of {} pages", lpa, l2p_.size()));
  }
  uint32_t ppa = allocate(channel % geo_.channels);
  if (l2p_[lpa] != kUnmapped) invalidate(l2p_[lpa]);
  l2p_[lpa] = ppa;
  p2l_[ppa] = static_cast<uint32_t>(lpa);
  ++blocks_[block_of_ppa(ppa)].valid;
  ++valid_total_;
  return ppa;
}

double Ftl::used_fraction() const {
  return 1.0 - static_cast<double>(free_block_count_) / geo_.total_blocks();
}

std::vector<uint32_t> Ftl::pick_victims(uint64_t budget) const {
  std::vector<uint32_t> cand;
  for (uint32_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].state == BlockState::kFull && blocks_[b].valid < geo_.pages_per_block) cand.push_back(b);
  }
  auto by_valid = [&](uint32_t a, uint32_t b) {
    if (blocks_[a].valid != blocks_[b].valid) return blocks_[a].valid < blocks_[b].valid;
    return a < b;
  };
  if (cand.size() > budget) {
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(budget), cand.end(), by_valid);
    cand.resize(budget);
  } else {
    std::sort(cand.begin(), cand.end(), by_valid);
  }
  return cand;
}

void Ftl::begin_erase(uint32_t block) {
  Block& blk = blocks_[block];
  if (blk.state != BlockState::kFull || blk.valid != 0) {
    throw FlashError(fmt::format("block {} is not a relocated full block", block));
  }
  blk.state = BlockState::kErasing;
}

void Ftl::finish_erase(uint32_t block) {
  Block& blk = blocks_[block];
  if (blk.state != BlockState::kErasing) throw FlashError(fmt::format("block {} was not erasing", block));
  blk = Block{};
  free_lists_[channel_of_block(block)].push_back(block);
  ++free_block_count_;
}

void Ftl::fill_invalid_blocks(uint64_t count) {
  // Spread filler over channels so no channel runs dry first.
  uint32_t ch = 0;
  uint32_t empty_streak = 0;
  while (count > 0 && empty_streak < geo_.channels) {
    auto& fl = free_lists_[ch];
    if (fl.empty()) {
      ++empty_streak;
    } else {
      empty_streak = 0;
      uint32_t b = fl.back();
      fl.pop_back();
      --free_block_count_;
      blocks_[b] = Block{BlockState::kFull, geo_.pages_per_block, 0};
      --count;
    }
    ch = (ch + 1) % geo_.channels;
  }
}

uint64_t Ftl::free_page_count() const {
  uint64_t n = free_block_count_ * geo_.pages_per_block;
  for (const auto& ob : open_block_) {
    if (ob) n += geo_.pages_per_block - blocks_[*ob].written;
  }
  return n;
}

uint64_t Ftl::invalid_page_count() const {
  uint64_t written = 0;
  for (const auto& b : blocks_) written += b.written;
  return written - valid_total_;
}

void Ftl::check_invariants() const {
  uint64_t valid = 0;
  std::vector<uint32_t> per_block(blocks_.size(), 0);
  for (uint32_t ppa = 0; ppa < p2l_.size(); ++ppa) {
    uint32_t lpa = p2l_[ppa];
    if (lpa == kUnmapped) continue;
    if (l2p_[lpa] != ppa) throw FlashError(fmt::format("PPA {} claims LPA {} which maps elsewhere", ppa, lpa));
    ++per_block[block_of_ppa(ppa)];
    ++valid;
  }
  for (uint64_t lpa = 0; lpa < l2p_.size(); ++lpa) {
    if (l2p_[lpa] != kUnmapped && p2l_[l2p_[lpa]] != lpa) {
      throw FlashError(fmt::format("LPA {} maps to PPA {} owned by another LPA", lpa, l2p_[lpa]));
    }
  }
  for (uint32_t b = 0; b < blocks_.size(); ++b) {
    if (per_block[b] != blocks_[b].valid) throw FlashError(fmt::format("block {} valid counter drifted", b));
  }
  if (valid != valid_total_) throw FlashError("valid page total drifted");
  if (valid_page_count() + invalid_page_count() + free_page_count() != geo_.total_pages()) {
    throw FlashError("flash capacity conservation violated");
  }
}

}  // namespace cxlsim
