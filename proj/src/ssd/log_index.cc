#include "cxlsim/ssd/log_index.hh"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include <fmt/core.h>

namespace cxlsim {

namespace {
constexpr uint32_t pack(uint32_t off, uint32_t log_off) { return (off << 26) | log_off; }
constexpr uint32_t offset_of(uint32_t packed) { return packed >> 26; }
constexpr uint32_t log_offset_of(uint32_t packed) { return packed & LogIndex::kMaxLogOffset; }
}  // namespace

LogIndex::LogIndex(uint64_t l1_slots) {
  uint64_t cap = std::bit_ceil(std::max<uint64_t>(l1_slots, 2));
  l1_.resize(cap);
  shift_ = 64 - std::countr_zero(cap);
}

size_t LogIndex::home(uint64_t lpa) const {
  // Fibonacci hashing.
  return static_cast<size_t>((lpa * 0x9e3779b97f4a7c15ULL) >> shift_);
}

std::optional<size_t> LogIndex::find_slot(uint64_t lpa) const {
  const size_t mask = l1_.size() - 1;
  size_t i = home(lpa);
  for (size_t probes = 0; probes < l1_.size(); ++probes, i = (i + 1) & mask) {
    if (l1_[i].lpa == kNoLpa) return std::nullopt;
    if (l1_[i].lpa == lpa) return i;
  }
  return std::nullopt;
}

uint32_t LogIndex::new_table() {
  uint32_t id;
  if (!free_tables_.empty()) {
    id = free_tables_.back();
    free_tables_.pop_back();
  } else {
    id = static_cast<uint32_t>(tables_.size());
    tables_.emplace_back();
  }
  tables_[id].slots.assign(kL2InitialSlots, kEmpty);
  tables_[id].count = 0;
  l2_slots_ += kL2InitialSlots;
  return id;
}

std::optional<size_t> LogIndex::l2_find(const L2Table& t, uint32_t page_offset) {
  const size_t mask = t.slots.size() - 1;
  size_t i = page_offset & mask;
  for (size_t probes = 0; probes < t.slots.size(); ++probes, i = (i + 1) & mask) {
    if (t.slots[i] == kEmpty) return std::nullopt;
    if (offset_of(t.slots[i]) == page_offset) return i;
  }
  return std::nullopt;
}

void LogIndex::l2_insert_raw(L2Table& t, uint32_t packed) {
  const size_t mask = t.slots.size() - 1;
  size_t i = offset_of(packed) & mask;
  while (t.slots[i] != kEmpty) i = (i + 1) & mask;
  t.slots[i] = packed;
  ++t.count;
}

void LogIndex::upsert(uint64_t lpa, uint32_t page_offset, uint32_t log_offset) {
  if (page_offset >= 64) throw std::invalid_argument("page offset out of range");
  if (log_offset > kMaxLogOffset) throw std::invalid_argument("log offset exceeds 26 bits");

  auto slot = find_slot(lpa);
  if (!slot) {
    if (l1_count_ == l1_.size()) {
      throw std::length_error(fmt::format("log index level 1 is full ({} LPAs)", l1_count_));
    }
    const size_t mask = l1_.size() - 1;
    size_t i = home(lpa);
    while (l1_[i].lpa != kNoLpa) i = (i + 1) & mask;
    l1_[i] = L1Slot{lpa, new_table()};
    ++l1_count_;
    slot = i;
  }
  L2Table& t = tables_[l1_[*slot].table];
  if (auto hit = l2_find(t, page_offset)) {
    t.slots[*hit] = pack(page_offset, log_offset);
    return;
  }
  // Grow when the post-insert load factor would exceed 0.75.
  if (4 * (uint64_t{t.count} + 1) > 3 * t.slots.size()) {
    std::vector<uint32_t> old = std::move(t.slots);
    l2_slots_ += old.size();
    t.slots.assign(old.size() * 2, kEmpty);
    t.count = 0;
    for (uint32_t p : old) {
      if (p != kEmpty) l2_insert_raw(t, p);
    }
  }
  l2_insert_raw(t, pack(page_offset, log_offset));
  ++entries_;
}

std::optional<uint32_t> LogIndex::lookup(uint64_t lpa, uint32_t page_offset) const {
  auto slot = find_slot(lpa);
  if (!slot) return std::nullopt;
  const L2Table& t = tables_[l1_[*slot].table];
  auto hit = l2_find(t, page_offset);
  if (!hit) return std::nullopt;
  return log_offset_of(t.slots[*hit]);
}

std::vector<std::pair<uint32_t, uint32_t>> LogIndex::entries_of(uint64_t lpa) const {
  std::vector<std::pair<uint32_t, uint32_t>> out;
  auto slot = find_slot(lpa);
  if (!slot) return out;
  for (uint32_t p : tables_[l1_[*slot].table].slots) {
    if (p != kEmpty) out.emplace_back(offset_of(p), log_offset_of(p));
  }
  return out;
}

bool LogIndex::erase(uint64_t lpa) {
  auto slot = find_slot(lpa);
  if (!slot) return false;
  uint32_t tid = l1_[*slot].table;
  entries_ -= tables_[tid].count;
  l2_slots_ -= tables_[tid].slots.size();
  tables_[tid].slots.clear();
  tables_[tid].slots.shrink_to_fit();
  tables_[tid].count = 0;
  free_tables_.push_back(tid);

  // Backward-shift deletion keeps probe chains intact.
  const size_t mask = l1_.size() - 1;
  size_t hole = *slot;
  size_t j = hole;
  for (size_t step = 1; step < l1_.size(); ++step) {
    j = (j + 1) & mask;
    if (l1_[j].lpa == kNoLpa) break;
    size_t h = home(l1_[j].lpa);
    // Move j into hole unless its home lies cyclically in (hole, j].
    bool in_range = hole <= j ? (hole < h && h <= j) : (hole < h || h <= j);
    if (!in_range) {
      l1_[hole] = l1_[j];
      hole = j;
    }
  }
  l1_[hole] = L1Slot{};
  --l1_count_;
  return true;
}

void LogIndex::clear() {
  for (auto& s : l1_) s = L1Slot{};
  tables_.clear();
  free_tables_.clear();
  l1_count_ = 0;
  l2_slots_ = 0;
  entries_ = 0;
}

std::vector<uint64_t> LogIndex::lpas() const {
  std::vector<uint64_t> out;
  out.reserve(l1_count_);
  for (const auto& s : l1_) {
    if (s.lpa != kNoLpa) out.push_back(s.lpa);
  }
  return out;
}

uint32_t LogIndex::l2_capacity(uint64_t lpa) const {
  auto slot = find_slot(lpa);
  return slot ? static_cast<uint32_t>(tables_[l1_[*slot].table].slots.size()) : 0;
}

uint32_t LogIndex::l2_size(uint64_t lpa) const {
  auto slot = find_slot(lpa);
  return slot ? tables_[l1_[*slot].table].count : 0;
}

}  // namespace cxlsim
