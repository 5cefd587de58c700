#include "cxlsim/ssd/data_cache.hh"

#include <stdexcept>

namespace cxlsim {

DataCache::DataCache(uint64_t bytes, uint32_t ways) : ways_(ways) {
  if (ways == 0) throw std::invalid_argument("data cache needs at least one way");
  sets_ = bytes / (uint64_t{ways} * kPageBytes);
  if (sets_ == 0) throw std::invalid_argument("data cache smaller than one set");
  lines_.resize(sets_ * ways_);
}

CachePage* DataCache::find(uint64_t lpa) {
  CachePage* set = set_begin(lpa);
  for (uint32_t w = 0; w < ways_; ++w) {
    if (set[w].valid && set[w].lpa == lpa) return &set[w];
  }
  return nullptr;
}

const CachePage* DataCache::find(uint64_t lpa) const {
  const CachePage* set = set_begin(lpa);
  for (uint32_t w = 0; w < ways_; ++w) {
    if (set[w].valid && set[w].lpa == lpa) return &set[w];
  }
  return nullptr;
}

DataCache::Insert DataCache::insert(uint64_t lpa, const PageData& data, bool dirty) {
  if (find(lpa)) throw std::logic_error("data cache insert of a resident page");
  CachePage* set = set_begin(lpa);
  CachePage* slot = nullptr;
  for (uint32_t w = 0; w < ways_ && !slot; ++w) {
    if (!set[w].valid) slot = &set[w];
  }
  Insert out{nullptr, std::nullopt};
  if (!slot) {
    slot = &set[0];
    for (uint32_t w = 1; w < ways_; ++w) {
      if (set[w].last_use < slot->last_use) slot = &set[w];
    }
    out.victim = *slot;
    --resident_;
  }
  *slot = CachePage{lpa, true, dirty, false, 0, ++clock_, data};
  ++resident_;
  out.page = slot;
  return out;
}

std::optional<CachePage> DataCache::erase(uint64_t lpa) {
  CachePage* p = find(lpa);
  if (!p) return std::nullopt;
  CachePage copy = *p;
  *p = CachePage{};
  --resident_;
  return copy;
}

}  // namespace cxlsim
