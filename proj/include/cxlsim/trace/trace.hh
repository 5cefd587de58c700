#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace cxlsim {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OpKind : uint8_t { kCompute, kRead, kWrite };

// One trace record. For kCompute `value` is an instruction count, otherwise a
// 64B-aligned virtual address.
struct TraceOp {
  OpKind kind = OpKind::kCompute;
  uint64_t value = 0;

  static TraceOp compute(uint32_t count) { return {OpKind::kCompute, count}; }
  static TraceOp read(uint64_t vaddr) { return {OpKind::kRead, vaddr}; }
  static TraceOp write(uint64_t vaddr) { return {OpKind::kWrite, vaddr}; }

  bool is_memory() const { return kind != OpKind::kCompute; }
  bool operator==(const TraceOp&) const = default;
};

struct ThreadTrace {
  uint32_t thread_id = 0;
  uint64_t footprint_bytes = 0;
  std::vector<TraceOp> ops;

  uint64_t instruction_count() const;
  uint64_t memory_op_count() const;
  bool operator==(const ThreadTrace&) const = default;
};

// Checks the alignment and footprint invariants; throws TraceError.
void validate_trace(const ThreadTrace& trace);

// Text format, one record per line:
//   !footprint <bytes>
//   !thread <id>
//   C <count> | R <hex-vaddr> | W <hex-vaddr>
void write_trace(const ThreadTrace& trace, const std::filesystem::path& path);
void write_trace(const ThreadTrace& trace, std::ostream& out);
ThreadTrace read_trace(const std::filesystem::path& path);
ThreadTrace parse_trace(std::istream& in, const std::string& origin = "<stream>");

// A directory with one file per thread plus `manifest.txt`:
//   workload <name>
//   threads <n>
//   footprint <bytes>
//   trace <file>          (one line per thread, in thread order)
struct TraceSet {
  std::string workload;
  std::vector<ThreadTrace> threads;
};

void write_trace_set(const TraceSet& set, const std::filesystem::path& dir);
TraceSet read_trace_set(const std::filesystem::path& dir);

}  // namespace cxlsim
