#pragma once

#include <cstdint>
#include <vector>

namespace cxlsim {

// Set-associative LRU cache that tracks line presence only; data lives in
// the backing stores.
class PresenceCache {
 public:
  PresenceCache(uint64_t bytes, uint32_t ways, uint32_t line_bytes = 64);

  // Hit updates recency.
  bool lookup(uint64_t line);
  bool contains(uint64_t line) const;
  // Inserts `line`, evicting the set's LRU entry when full.
  void fill(uint64_t line);
  // Forgets recency but keeps contents.
  void reset_recency();

  uint64_t sets() const { return sets_; }
  uint32_t ways() const { return ways_; }
  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }

 private:
  static constexpr uint64_t kInvalid = UINT64_MAX;
  struct Way {
    uint64_t line = kInvalid;
    uint64_t stamp = 0;
  };

  uint64_t age(const Way& w) const { return w.stamp > floor_ ? w.stamp : 0; }
  Way* set_of(uint64_t line) { return &ways_v_[(line % sets_) * ways_]; }
  const Way* set_of(uint64_t line) const { return &ways_v_[(line % sets_) * ways_]; }

  uint64_t sets_;
  uint32_t ways_;
  std::vector<Way> ways_v_;
  uint64_t clock_ = 0;
  // Stamps at or below this count as 0 (recency forgotten).
  uint64_t floor_ = 0;
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
};

}  // namespace cxlsim
