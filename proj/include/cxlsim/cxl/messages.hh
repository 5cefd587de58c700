#pragma once

#include <cstdint>
#include <memory>

#include "cxlsim/flash/ftl.hh"
#include "cxlsim/metrics/request_class.hh"

namespace cxlsim {

// Master-to-subordinate (host to device).
enum class M2SKind : uint8_t { kMemRd, kMemWr, kPageInstall };
enum class Purpose : uint8_t { kDemand, kMigration };

struct M2SRequest {
  M2SKind kind = M2SKind::kMemRd;
  uint16_t tag = 0;
  uint64_t addr = 0;  // device physical address, 64B aligned
  uint64_t data = 0;  // MemWr payload
  Purpose purpose = Purpose::kDemand;
  // MemRd from a thread with nothing to switch to: never answer with a delay.
  bool no_delay = false;
  // kPageInstall only: a whole page written back by demotion.
  std::shared_ptr<const PageData> page;
  bool dirty = false;

  // Link slots occupied, one per 64B.
  uint32_t slots() const { return kind == M2SKind::kPageInstall ? kLinesPerPage : 1; }
  uint64_t lpa() const { return addr / kPageBytes; }
  uint32_t page_offset() const { return static_cast<uint32_t>((addr % kPageBytes) / kLineBytes); }
};

// Subordinate-to-master (device to host).
enum class S2MKind : uint8_t { kMemData, kNdr };
enum class NdrOpcode : uint8_t { kCmp, kDelay };

struct S2MResponse {
  S2MKind kind = S2MKind::kMemData;
  NdrOpcode opcode = NdrOpcode::kCmp;
  uint16_t tag = 0;
  uint64_t data = 0;
  RequestClass service = RequestClass::kSsdReadHit;

  static S2MResponse mem_data(uint16_t tag, uint64_t data, RequestClass c) {
    return {S2MKind::kMemData, NdrOpcode::kCmp, tag, data, c};
  }
  static S2MResponse cmp(uint16_t tag) { return {S2MKind::kNdr, NdrOpcode::kCmp, tag, 0, RequestClass::kSsdWrite}; }
  static S2MResponse delay(uint16_t tag) {
    return {S2MKind::kNdr, NdrOpcode::kDelay, tag, 0, RequestClass::kSsdReadMiss};
  }
  bool is_delay() const { return kind == S2MKind::kNdr && opcode == NdrOpcode::kDelay; }
};

constexpr uint64_t device_addr(uint64_t lpa, uint32_t page_offset) {
  return lpa * kPageBytes + uint64_t{page_offset} * kLineBytes;
}

}  // namespace cxlsim
