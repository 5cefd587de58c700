#include "cxlsim/ssd/write_log.hh"

#include <stdexcept>

namespace cxlsim {

LogBuffer::LogBuffer(uint64_t entries) : capacity_(entries), index_(entries) {
  if (entries == 0) throw std::invalid_argument("log buffer needs at least one entry");
  if (entries > LogIndex::kMaxLogOffset) throw std::invalid_argument("log buffer exceeds 26-bit offsets");
  entries_.reserve(entries);
}

uint32_t LogBuffer::append(uint64_t lpa, uint32_t page_offset, uint64_t data) {
  if (full()) throw std::logic_error("append to a full log buffer");
  auto off = static_cast<uint32_t>(entries_.size());
  entries_.push_back(LogEntry{lpa, page_offset, data});
  index_.upsert(lpa, page_offset, off);
  return off;
}

std::optional<uint64_t> LogBuffer::lookup(uint64_t lpa, uint32_t page_offset) const {
  auto off = index_.lookup(lpa, page_offset);
  if (!off) return std::nullopt;
  return entries_[*off].data;
}

void LogBuffer::merge_into(uint64_t lpa, PageData& page) const {
  for (auto [line, off] : index_.entries_of(lpa)) page[line] = entries_[off].data;
}

void LogBuffer::reset() {
  entries_.clear();
  index_.clear();
}

WriteLog::WriteLog(uint64_t total_bytes)
    : bufs_{LogBuffer(total_bytes / 2 / kLineBytes), LogBuffer(total_bytes / 2 / kLineBytes)} {}

void WriteLog::swap() {
  if (!compacting().empty()) throw std::logic_error("log swap while the other buffer holds data");
  active_ = 1 - active_;
}

std::optional<uint64_t> WriteLog::lookup(uint64_t lpa, uint32_t page_offset) const {
  if (auto v = active().lookup(lpa, page_offset)) return v;
  return compacting().lookup(lpa, page_offset);
}

void WriteLog::merge_into(uint64_t lpa, PageData& page) const {
  compacting().merge_into(lpa, page);
  active().merge_into(lpa, page);
}

bool WriteLog::contains(uint64_t lpa) const {
  return active().index().contains(lpa) || compacting().index().contains(lpa);
}

bool WriteLog::drop(uint64_t lpa) {
  bool a = bufs_[0].drop(lpa);
  bool b = bufs_[1].drop(lpa);
  return a || b;
}

uint64_t WriteLog::index_memory_bytes() const {
  return bufs_[0].index().memory_bytes() + bufs_[1].index().memory_bytes();
}

}  // namespace cxlsim
