#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace cxlsim {

// Where an off-chip memory access was served.
enum class RequestClass : uint8_t {
  kHostRead,     // H-R
  kHostWrite,    // H-W
  kSsdReadHit,   // S-R-H: SSD DRAM hit (log or data cache)
  kSsdReadMiss,  // S-R-M: SSD DRAM miss, served after a flash fetch
  kSsdWrite,     // S-W
};

constexpr size_t kRequestClassCount = 5;

constexpr std::array<RequestClass, kRequestClassCount> kAllRequestClasses = {
    RequestClass::kHostRead, RequestClass::kHostWrite, RequestClass::kSsdReadHit, RequestClass::kSsdReadMiss,
    RequestClass::kSsdWrite};

constexpr std::string_view to_string(RequestClass c) {
  switch (c) {
    case RequestClass::kHostRead: return "H-R";
    case RequestClass::kHostWrite: return "H-W";
    case RequestClass::kSsdReadHit: return "S-R-H";
    case RequestClass::kSsdReadMiss: return "S-R-M";
    case RequestClass::kSsdWrite: return "S-W";
  }
  return "?";
}

// Column-name friendly form, e.g. "s_r_h".
constexpr std::string_view column_stem(RequestClass c) {
  switch (c) {
    case RequestClass::kHostRead: return "h_r";
    case RequestClass::kHostWrite: return "h_w";
    case RequestClass::kSsdReadHit: return "s_r_h";
    case RequestClass::kSsdReadMiss: return "s_r_m";
    case RequestClass::kSsdWrite: return "s_w";
  }
  return "x";
}

}  // namespace cxlsim
