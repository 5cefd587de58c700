#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cxlsim/flash/ftl.hh"

namespace cxlsim {

struct CachePage {
  uint64_t lpa = 0;
  bool valid = false;
  bool dirty = false;
  bool nominated = false;
  uint32_t hotness = 0;
  uint64_t last_use = 0;
  PageData data{};
};

// Page-granular set-associative cache with LRU replacement per set.
class DataCache {
 public:
  DataCache(uint64_t bytes, uint32_t ways);

  CachePage* find(uint64_t lpa);
  const CachePage* find(uint64_t lpa) const;
  void touch(CachePage& page) { page.last_use = ++clock_; }

  struct Insert {
    CachePage* page;
    std::optional<CachePage> victim;
  };
  // `lpa` must not be resident.
  Insert insert(uint64_t lpa, const PageData& data, bool dirty);

  // Returns the removed page.
  std::optional<CachePage> erase(uint64_t lpa);

  uint64_t sets() const { return sets_; }
  uint32_t ways() const { return ways_; }
  uint64_t capacity_pages() const { return sets_ * ways_; }
  uint64_t resident_pages() const { return resident_; }

 private:
  CachePage* set_begin(uint64_t lpa) { return &lines_[(lpa % sets_) * ways_]; }
  const CachePage* set_begin(uint64_t lpa) const { return &lines_[(lpa % sets_) * ways_]; }

  uint64_t sets_;
  uint32_t ways_;
  std::vector<CachePage> lines_;
  uint64_t clock_ = 0;
  uint64_t resident_ = 0;
};

}  // namespace cxlsim
