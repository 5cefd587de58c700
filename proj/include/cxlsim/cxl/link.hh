#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cxlsim/cxl/messages.hh"
#include "cxlsim/sim/config.hh"
#include "cxlsim/sim/event_queue.hh"

namespace cxlsim {

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct LinkStats {
  uint64_t requests = 0;
  uint64_t responses = 0;
  uint64_t m2s_bytes = 0;  // data-bearing bytes host -> device
  uint64_t s2m_bytes = 0;  // data-bearing bytes device -> host
  uint64_t delay_ndrs = 0;
  uint64_t tag_stalls = 0;  // requests that waited for a free tag
  uint32_t max_tags_in_use = 0;
};

// CXL.mem transaction layer between the LLC and the device. Each direction
// is a FIFO serializer: a message occupies one 4ns slot per 64B at
// 16 GB/s, then flies for the protocol latency.
class CxlLink {
 public:
  using ResponseHandler = std::function<void(const S2MResponse&)>;
  using DeviceHandler = std::function<void(const M2SRequest&)>;

  CxlLink(EventQueue& eq, const SimConfig& cfg);

  void attach_device(DeviceHandler h) { device_ = std::move(h); }

  // Host side. Takes a tag from the pool, or waits in FIFO order for one.
  // `on_response` runs on the terminal response for this transaction.
  void send_request(M2SRequest req, ResponseHandler on_response);
  // Uses req.tag as given. Throws ProtocolError if the tag is outstanding.
  void send_request_tagged(const M2SRequest& req, ResponseHandler on_response);

  // Device side. Throws ProtocolError for an unknown tag or a delay NDR
  // answering anything but MemRd.
  void send_response(const S2MResponse& resp);

  SimTime slot() const { return slot_; }
  SimTime latency() const { return latency_; }
  uint32_t tags_in_use() const { return in_use_; }
  size_t tag_waiters() const { return waiting_.size(); }
  const LinkStats& stats() const { return stats_; }
  SimTime last_delivery() const { return last_delivery_; }

 private:
  struct Outstanding {
    bool live = false;
    bool responded = false;
    M2SKind kind = M2SKind::kMemRd;
    ResponseHandler handler;
  };

  SimTime transmit(SimTime& busy_until, uint32_t slots);
  void release_tag(uint16_t tag);

  EventQueue& eq_;
  SimTime slot_;
  SimTime latency_;
  SimTime m2s_busy_;
  SimTime s2m_busy_;
  DeviceHandler device_;
  std::vector<Outstanding> tags_;
  std::deque<uint16_t> free_tags_;
  std::deque<std::pair<M2SRequest, ResponseHandler>> waiting_;
  uint32_t in_use_ = 0;
  LinkStats stats_;
  SimTime last_delivery_;
};

}  // namespace cxlsim
