#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace cxlsim {

// Two-level index of one log buffer.
//   level 1: LPA -> level-2 table, open addressing (16B per slot)
//   level 2: page offset (6 bit) -> log offset (26 bit), packed in 4B slots
class LogIndex {
 public:
  static constexpr uint32_t kMaxLogOffset = (1u << 26) - 1;
  static constexpr uint32_t kL2InitialSlots = 4;

  // `l1_slots` is rounded up to a power of two. It bounds the number of
  // distinct LPAs the index can hold.
  explicit LogIndex(uint64_t l1_slots);

  // Upserts (lpa, page_offset) -> log_offset. Grows the level-2 table first
  // when the insert would push its load factor above 0.75.
  void upsert(uint64_t lpa, uint32_t page_offset, uint32_t log_offset);

  std::optional<uint32_t> lookup(uint64_t lpa, uint32_t page_offset) const;
  bool contains(uint64_t lpa) const { return find_slot(lpa).has_value(); }

  // (page_offset, log_offset) pairs for one LPA, in slot order.
  std::vector<std::pair<uint32_t, uint32_t>> entries_of(uint64_t lpa) const;

  // Removes every entry of `lpa`. Returns whether anything was removed.
  bool erase(uint64_t lpa);
  void clear();

  // Distinct LPAs in level-1 slot order (deterministic).
  std::vector<uint64_t> lpas() const;

  uint64_t lpa_count() const { return l1_count_; }
  uint64_t entry_count() const { return entries_; }
  uint64_t l1_capacity() const { return l1_.size(); }
  // Capacity of the level-2 table of `lpa`, 0 when absent.
  uint32_t l2_capacity(uint64_t lpa) const;
  uint32_t l2_size(uint64_t lpa) const;

  // 16B per level-1 slot plus 4B per allocated level-2 slot.
  uint64_t memory_bytes() const { return 16 * l1_.size() + 4 * l2_slots_; }

 private:
  static constexpr uint32_t kEmpty = UINT32_MAX;
  static constexpr uint64_t kNoLpa = UINT64_MAX;

  struct L2Table {
    std::vector<uint32_t> slots;  // (offset << 26) | log_offset, or kEmpty
    uint32_t count = 0;
  };
  struct L1Slot {
    uint64_t lpa = kNoLpa;
    uint32_t table = 0;  // index into tables_
  };

  size_t home(uint64_t lpa) const;
  std::optional<size_t> find_slot(uint64_t lpa) const;
  static void l2_insert_raw(L2Table& t, uint32_t packed);
  static std::optional<size_t> l2_find(const L2Table& t, uint32_t page_offset);
  uint32_t new_table();

  std::vector<L1Slot> l1_;
  uint64_t l1_count_ = 0;
  int shift_ = 0;
  std::vector<L2Table> tables_;
  std::vector<uint32_t> free_tables_;
  uint64_t l2_slots_ = 0;
  uint64_t entries_ = 0;
};

}  // namespace cxlsim
