#include "cxlsim/trace/trace.hh"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ostream.h>

namespace cxlsim {

uint64_t ThreadTrace::instruction_count() const {
  uint64_t n = 0;
  for (const auto& op : ops) n += op.kind == OpKind::kCompute ? op.value : 1;
  return n;
}

uint64_t ThreadTrace::memory_op_count() const {
  uint64_t n = 0;
  for (const auto& op : ops) n += op.is_memory() ? 1 : 0;
  return n;
}

void validate_trace(const ThreadTrace& trace) {
  for (size_t i = 0; i < trace.ops.size(); ++i) {
    const auto& op = trace.ops[i];
    if (!op.is_memory()) continue;
    if (op.value % 64 != 0) {
      throw TraceError(fmt::format("op {}: address {:#x} is not 64B aligned", i, op.value));
    }
    if (op.value >= trace.footprint_bytes) {
      throw TraceError(fmt::format("op {}: address {:#x} outside footprint {}", i, op.value,
                                   trace.footprint_bytes));
    }
  }
}

void write_trace(const ThreadTrace& trace, std::ostream& out) {
  fmt::print(out, "!footprint {}\n!thread {}\n", trace.footprint_bytes, trace.thread_id);
  std::string buf;
  buf.reserve(1 << 16);
  for (const auto& op : trace.ops) {
    switch (op.kind) {
      case OpKind::kCompute: buf += fmt::format("C {}\n", op.value); break;
      case OpKind::kRead: buf += fmt::format("R {:x}\n", op.value); break;
      case OpKind::kWrite: buf += fmt::format("W {:x}\n", op.value); break;
    }
    if (buf.size() > (1 << 15)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
}

void write_trace(const ThreadTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TraceError(fmt::format("cannot write trace '{}'", path.string()));
  write_trace(trace, out);
  if (!out) throw TraceError(fmt::format("write failed for '{}'", path.string()));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

uint64_t parse_number(std::string_view tok, int base, const std::string& origin, size_t line_no) {
  if (base == 16 && (tok.starts_with("0x") || tok.starts_with("0X"))) tok.remove_prefix(2);
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, base);
  if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size()) {
    throw TraceError(fmt::format("{}:{}: malformed number '{}'", origin, line_no, tok));
  }
  return v;
}

}  // namespace

ThreadTrace parse_trace(std::istream& in, const std::string& origin) {
  ThreadTrace t;
  bool have_footprint = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    auto sp = s.find(' ');
    if (sp == std::string_view::npos) {
      throw TraceError(fmt::format("{}:{}: malformed line '{}'", origin, line_no, s));
    }
    std::string_view tag = s.substr(0, sp);
    std::string_view arg = trim(s.substr(sp + 1));
    if (tag == "!footprint") {
      t.footprint_bytes = parse_number(arg, 10, origin, line_no);
      have_footprint = true;
    } else if (tag == "!thread") {
      t.thread_id = static_cast<uint32_t>(parse_number(arg, 10, origin, line_no));
    } else if (tag == "C") {
      uint64_t n = parse_number(arg, 10, origin, line_no);
      if (n == 0 || n > UINT32_MAX) {
        throw TraceError(fmt::format("{}:{}: compute count out of range", origin, line_no));
      }
      t.ops.push_back(TraceOp::compute(static_cast<uint32_t>(n)));
    } else if (tag == "R" || tag == "W") {
      if (!have_footprint) {
        throw TraceError(fmt::format("{}:{}: memory op before !footprint header", origin, line_no));
      }
      uint64_t addr = parse_number(arg, 16, origin, line_no);
      if (addr % 64 != 0) {
        throw TraceError(fmt::format("{}:{}: address {:x} is not 64B aligned", origin, line_no, addr));
      }
      if (addr >= t.footprint_bytes) {
        throw TraceError(fmt::format("{}:{}: address {:x} outside footprint", origin, line_no, addr));
      }
      t.ops.push_back(tag == "R" ? TraceOp::read(addr) : TraceOp::write(addr));
    } else {
      throw TraceError(fmt::format("{}:{}: unknown record '{}'", origin, line_no, tag));
    }
  }
  if (!have_footprint) throw TraceError(fmt::format("{}: missing !footprint header", origin));
  return t;
}

ThreadTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceError(fmt::format("cannot open trace '{}'", path.string()));
  return parse_trace(in, path.string());
}

void write_trace_set(const TraceSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw TraceError(fmt::format("cannot write manifest in '{}'", dir.string()));
  uint64_t footprint = set.threads.empty() ? 0 : set.threads.front().footprint_bytes;
  fmt::print(manifest, "workload {}\nthreads {}\nfootprint {}\n", set.workload, set.threads.size(), footprint);
  for (const auto& t : set.threads) {
    std::string name = fmt::format("thread_{:03}.trace", t.thread_id);
    write_trace(t, dir / name);
    fmt::print(manifest, "trace {}\n", name);
  }
}

TraceSet read_trace_set(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw TraceError(fmt::format("missing manifest.txt in '{}'", dir.string()));
  TraceSet set;
  size_t declared = 0;
  std::string line;
  size_t line_no = 0;
  const std::string origin = (dir / "manifest.txt").string();
  while (std::getline(manifest, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    auto sp = s.find(' ');
    std::string_view key = s.substr(0, sp);
    std::string_view arg = sp == std::string_view::npos ? std::string_view{} : trim(s.substr(sp + 1));
    if (key == "workload") {
      set.workload = std::string(arg);
    } else if (key == "threads") {
      declared = parse_number(arg, 10, origin, line_no);
    } else if (key == "footprint") {
      // informational; each trace carries its own header
    } else if (key == "trace") {
      set.threads.push_back(read_trace(dir / std::string(arg)));
    } else {
      throw TraceError(fmt::format("{}:{}: unknown manifest key '{}'", origin, line_no, key));
    }
  }
  if (set.threads.size() != declared) {
    throw TraceError(fmt::format("{}: declares {} threads but lists {}", origin, declared, set.threads.size()));
  }
  return set;
}

}  // namespace cxlsim
