#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cxlsim/flash/ftl.hh"
#include "cxlsim/ssd/log_index.hh"

namespace cxlsim {

struct LogEntry {
  uint64_t lpa = 0;
  uint32_t page_offset = 0;
  uint64_t data = 0;
};

// One append-only buffer of 64B entries with its own index.
class LogBuffer {
 public:
  explicit LogBuffer(uint64_t entries);

  bool full() const { return entries_.size() == capacity_; }
  bool empty() const { return entries_.empty(); }
  uint64_t size() const { return entries_.size(); }
  uint64_t capacity() const { return capacity_; }

  // Returns the log offset of the new entry. The buffer must not be full.
  uint32_t append(uint64_t lpa, uint32_t page_offset, uint64_t data);
  std::optional<uint64_t> lookup(uint64_t lpa, uint32_t page_offset) const;
  // Applies this buffer's newest line versions of `lpa` onto `page`.
  void merge_into(uint64_t lpa, PageData& page) const;

  const LogIndex& index() const { return index_; }
  bool drop(uint64_t lpa) { return index_.erase(lpa); }
  void reset();

 private:
  uint64_t capacity_;
  std::vector<LogEntry> entries_;
  LogIndex index_;
};

// Double-buffered log. Writes go to the active buffer; the other one is
// either empty or being compacted.
class WriteLog {
 public:
  // `total_bytes` is split evenly between the two buffers.
  explicit WriteLog(uint64_t total_bytes);

  LogBuffer& active() { return bufs_[active_]; }
  LogBuffer& compacting() { return bufs_[1 - active_]; }
  const LogBuffer& active() const { return bufs_[active_]; }
  const LogBuffer& compacting() const { return bufs_[1 - active_]; }

  // Seals the active buffer and makes the (empty) other buffer active.
  void swap();

  // Newest logged version; the active buffer wins.
  std::optional<uint64_t> lookup(uint64_t lpa, uint32_t page_offset) const;
  void merge_into(uint64_t lpa, PageData& page) const;
  bool contains(uint64_t lpa) const;
  // Nulls the index entries of `lpa` in both buffers.
  bool drop(uint64_t lpa);

  uint64_t index_memory_bytes() const;
  uint64_t entries_per_buffer() const { return bufs_[0].capacity(); }

 private:
  std::array<LogBuffer, 2> bufs_;
  int active_ = 0;
};

}  // namespace cxlsim
