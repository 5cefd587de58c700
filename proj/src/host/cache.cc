#include "cxlsim/host/cache.hh"

#include <stdexcept>

namespace cxlsim {

PresenceCache::PresenceCache(uint64_t bytes, uint32_t ways, uint32_t line_bytes) : ways_(ways) {
  if (ways == 0 || line_bytes == 0) throw std::invalid_argument("cache needs ways and a line size");
  sets_ = bytes / (uint64_t{ways} * line_bytes);
  if (sets_ == 0) throw std::invalid_argument("cache smaller than one set");
  ways_v_.resize(sets_ * ways_);
}

bool PresenceCache::lookup(uint64_t line) {
  Way* set = set_of(line);
  for (uint32_t w = 0; w < ways_; ++w) {
    if (set[w].line == line) {
      set[w].stamp = ++clock_;
      ++hits_;
      return true;
    }
  }
  ++misses_;
  return false;
}

bool PresenceCache::contains(uint64_t line) const {
  const Way* set = set_of(line);
  for (uint32_t w = 0; w < ways_; ++w) {
    if (set[w].line == line) return true;
  }
  return false;
}

void PresenceCache::fill(uint64_t line) {
  Way* set = set_of(line);
  Way* victim = nullptr;
  for (uint32_t w = 0; w < ways_; ++w) {
    if (set[w].line == line) {
      set[w].stamp = ++clock_;
      return;
    }
    if (set[w].line == kInvalid) {
      if (!victim || victim->line != kInvalid) victim = &set[w];
    } else if (!victim || (victim->line != kInvalid && age(set[w]) < age(*victim))) {
      victim = &set[w];
    }
  }
  victim->line = line;
  victim->stamp = ++clock_;
}

void PresenceCache::reset_recency() {
  floor_ = clock_;
}

}  // namespace cxlsim
