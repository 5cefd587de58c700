#include "cxlsim/cxl/link.hh"

#include <fmt/core.h>

namespace cxlsim {

CxlLink::CxlLink(EventQueue& eq, const SimConfig& cfg)
    : eq_(eq),
      slot_(SimTime::from_ps(kLineBytes * 1'000'000'000'000ull / cfg.cxl_bandwidth_byte_s)),
      latency_(SimTime::from_ns(cfg.cxl_latency_ns)),
      tags_(65536) {
  if (cfg.cxl_tags == 0 || cfg.cxl_tags > 65536) throw ConfigError("cxl_tags must be in [1, 65536]");
  for (uint32_t t = 0; t < cfg.cxl_tags; ++t) free_tags_.push_back(static_cast<uint16_t>(t));
}

SimTime CxlLink::transmit(SimTime& busy_until, uint32_t slots) {
  SimTime depart = max(eq_.now(), busy_until) + slot_ * slots;
  busy_until = depart;
  return depart + latency_;
}

void CxlLink::send_request(M2SRequest req, ResponseHandler on_response) {
  if (free_tags_.empty()) {
    ++stats_.tag_stalls;
    waiting_.emplace_back(std::move(req), std::move(on_response));
    return;
  }
  req.tag = free_tags_.front();
  free_tags_.pop_front();
  send_request_tagged(req, std::move(on_response));
}

void CxlLink::send_request_tagged(const M2SRequest& req, ResponseHandler on_response) {
  Outstanding& o = tags_[req.tag];
  if (o.live) throw ProtocolError(fmt::format("duplicate outstanding tag {}", req.tag));
  o = Outstanding{true, false, req.kind, std::move(on_response)};
  ++in_use_;
  stats_.max_tags_in_use = std::max(stats_.max_tags_in_use, in_use_);
  ++stats_.requests;
  if (req.kind != M2SKind::kMemRd) stats_.m2s_bytes += uint64_t{req.slots()} * kLineBytes;
  SimTime arrive = transmit(m2s_busy_, req.slots());
  eq_.schedule(arrive, [this, req] {
    last_delivery_ = eq_.now();
    if (!device_) throw ProtocolError("no device attached to the link");
    device_(req);
  }, ComponentId::kLink);
}

void CxlLink::send_response(const S2MResponse& resp) {
  Outstanding& o = tags_[resp.tag];
  if (!o.live || o.responded) throw ProtocolError(fmt::format("response for unknown tag {}", resp.tag));
  if (resp.is_delay() && o.kind != M2SKind::kMemRd) {
    throw ProtocolError(fmt::format("delay NDR answers a non-MemRd on tag {}", resp.tag));
  }
  if (resp.kind == S2MKind::kMemData && o.kind != M2SKind::kMemRd) {
    throw ProtocolError(fmt::format("MemData answers a non-MemRd on tag {}", resp.tag));
  }
  if (resp.kind == S2MKind::kNdr && resp.opcode == NdrOpcode::kCmp && o.kind == M2SKind::kMemRd) {
    throw ProtocolError(fmt::format("Cmp NDR answers a MemRd on tag {}", resp.tag));
  }
  o.responded = true;
  ++stats_.responses;
  if (resp.is_delay()) ++stats_.delay_ndrs;
  if (resp.kind == S2MKind::kMemData) stats_.s2m_bytes += kLineBytes;
  SimTime arrive = transmit(s2m_busy_, 1);
  eq_.schedule(arrive, [this, resp] {
    last_delivery_ = eq_.now();
    ResponseHandler h = std::move(tags_[resp.tag].handler);
    release_tag(resp.tag);
    if (h) h(resp);
  }, ComponentId::kLink);
}

void CxlLink::release_tag(uint16_t tag) {
  tags_[tag] = Outstanding{};
  --in_use_;
  free_tags_.push_back(tag);
  while (!waiting_.empty() && !free_tags_.empty()) {
    auto [req, h] = std::move(waiting_.front());
    waiting_.pop_front();
    req.tag = free_tags_.front();
    free_tags_.pop_front();
    send_request_tagged(req, std::move(h));
  }
}

}  // namespace cxlsim
