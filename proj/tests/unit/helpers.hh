#pragma once

#include <string>
#include <vector>

#include "cxlsim/driver/system.hh"
#include "cxlsim/sim/config.hh"
#include "cxlsim/trace/trace.hh"

namespace cxlsim::test {

// Small machine: 4 flash channels, 64 blocks each, so precondition is fast.
inline SimConfig small_config() {
  SimConfig c;
  c.flash_channels = 4;
  c.chips_per_channel = 1;
  c.dies_per_chip = 1;
  c.planes_per_die = 1;
  c.blocks_per_plane = 64;
  c.pages_per_block = 64;
  c.gc_blocks_to_erase = 8;
  return c;
}

// Parses a compact trace: "C10 R0 W40 R1000" (hex addresses).
inline ThreadTrace make_trace(uint32_t id, uint64_t footprint, const std::string& text) {
  ThreadTrace t;
  t.thread_id = id;
  t.footprint_bytes = footprint;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] == ' ') {
      ++i;
      continue;
    }
    char k = text[i++];
    size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    std::string num = text.substr(i, j - i);
    i = j;
    if (k == 'C') t.ops.push_back(TraceOp::compute(static_cast<uint32_t>(std::stoul(num))));
    else if (k == 'R') t.ops.push_back(TraceOp::read(std::stoull(num, nullptr, 16)));
    else t.ops.push_back(TraceOp::write(std::stoull(num, nullptr, 16)));
  }
  return t;
}

inline TraceSet make_set(std::vector<ThreadTrace> threads, std::string name = "t") {
  return TraceSet{std::move(name), std::move(threads)};
}

}  // namespace cxlsim::test
