#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "cxlsim/driver/runner.hh"
#include "cxlsim/driver/sweep.hh"
#include "cxlsim/driver/system.hh"
#include "cxlsim/driver/variant.hh"
#include "cxlsim/trace/workload.hh"

#include "helpers.hh"

using namespace cxlsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("cxlsim_driver_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

size_t line_count(const std::string& s) {
  size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

int sh(const std::string& cmd) {
  int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const std::string kCli = CXLSIM_CLI_PATH;

// Small machine where promotions, demotions, compactions and GC all happen.
SimConfig churn_config() {
  SimConfig c = test::small_config();
  c.blocks_per_plane = 16;
  c.gc_blocks_to_erase = 4;
  c.precondition_fraction = 0.75;
  c.host_dram_size_byte = 16 * 4096;
  c.ssd_dram_size_byte = 256 * 4096;
  c.write_log_size_byte = 32 * 4096;
  c.ssd_cache_size_byte = 128 * 4096;
  c.promotion_threshold = 4;
  return c;
}

WorkloadSpec churn_workload(uint64_t seed) {
  WorkloadSpec w;
  w.footprint_bytes = 512 * 4096;
  w.thread_count = 16;
  w.ops_per_thread = 1000;
  w.write_ratio = 0.4;
  w.zipf_theta = 0.9;
  w.mean_compute_gap = 5;
  w.seed = seed;
  return w;
}

void write_tiny_workload(const fs::path& p) {
  std::ofstream(p) << "name = tiny\nfootprint_bytes = 1048576\nthread_count = 2\nops_per_thread = 1500\n";
}

}  // namespace

TEST_CASE("variant: knob table") {
  CHECK(variant_names().size() == 8);
  auto full = variant_knobs("Full");
  CHECK((full.ctx_switch && full.promotion && full.write_log && !full.dram_only));
  auto base = variant_knobs("Base");
  CHECK((!base.ctx_switch && !base.promotion && !base.write_log && !base.dram_only));
  CHECK(variant_knobs("C").ctx_switch);
  CHECK(!variant_knobs("C").promotion);
  CHECK(variant_knobs("WP").write_log);
  CHECK(variant_knobs("WP").promotion);
  CHECK(!variant_knobs("WP").ctx_switch);
  CHECK(variant_knobs("DRAM-Only").dram_only);
  CHECK_THROWS_AS(variant_knobs("Turbo"), ConfigError);
}

TEST_CASE("variant: Base disables all three mechanisms on any config") {
  SimConfig c;
  apply_variant(c, "Base");
  CHECK(!c.device_triggered_ctx_swt);
  CHECK(!c.promotion_enable);
  CHECK(!c.write_log_enable);
  CHECK(!c.dram_only);
}

TEST_CASE("driver: DRAM-Only never touches the SSD") {
  auto w = churn_workload(3);
  SimConfig c = churn_config();
  apply_variant(c, "DRAM-Only");
  System sys(c, generate_trace_set(w));
  sys.run();
  REQUIRE(!sys.check_memory_image());
  CHECK(sys.link().stats().requests == 0);
  auto r = sys.record("DRAM-Only");
  CHECK(r.flash_write_bytes == 0);
  CHECK(r.flash_read_bytes == 0);
  CHECK(r.amat.count(RequestClass::kSsdReadHit) + r.amat.count(RequestClass::kSsdReadMiss) +
            r.amat.count(RequestClass::kSsdWrite) ==
        0);
}

TEST_CASE("driver: every variant matches the flat-array image under churn") {
  uint64_t gc = 0, comp = 0, prom = 0, dem = 0, cs = 0;
  for (uint64_t seed : {1, 2}) {
    for (const auto& v : variant_names()) {
      SimConfig c = churn_config();
      c.seed = seed;
      apply_variant(c, v);
      System sys(c, generate_trace_set(churn_workload(seed)));
      sys.run();
      auto bad = sys.check_memory_image();
      INFO(v << " seed " << seed);
      CHECK_MESSAGE(!bad, (bad ? *bad : std::string()));
      auto r = sys.record(v);
      gc += r.gc_count;
      comp += r.compactions;
      prom += r.promotions;
      dem += r.demotions;
      cs += r.ctx_switches;
    }
  }
  CHECK(gc > 0);
  CHECK(comp > 0);
  CHECK(prom > 0);
  CHECK(dem > 0);
  CHECK(cs > 0);
}

TEST_CASE("driver: repeated runs give identical rows") {
  SimConfig c = churn_config();
  auto a = simulate(c, "Full", generate_trace_set(churn_workload(9)));
  auto b = simulate(c, "Full", generate_trace_set(churn_workload(9)));
  CHECK(csv_row(a) == csv_row(b));
  auto d = simulate(c, "Full", generate_trace_set(churn_workload(10)));
  CHECK(csv_row(a) != csv_row(d));
}

TEST_CASE("driver: scale_threads holds total work fixed") {
  WorkloadSpec w;
  w.thread_count = 8;
  w.ops_per_thread = 3000;
  auto s = scale_threads(w, 24);
  CHECK(s.thread_count == 24);
  CHECK(s.ops_per_thread == 1000);
  CHECK(scale_threads(w, 0).thread_count == 8);
  CHECK(scale_threads(w, 8).ops_per_thread == 3000);
}

TEST_CASE("sweep: parse and expand") {
  auto d = scratch("parse");
  write_tiny_workload(d / "w.txt");
  std::ofstream(d / "s.txt") << "variants = Base, Full\nseeds = 1, 2  # two seeds\nworkload = w.txt\n";
  auto spec = parse_sweep_spec(d / "s.txt");
  CHECK(spec.workload == (d / "w.txt").string());
  auto pts = expand(spec);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].stem() == "Base_t8_ULL_log-_cache-_s1");
  CHECK(pts[3].stem() == "Full_t8_ULL_log-_cache-_s2");

  std::ofstream(d / "bad1.txt") << "variants = Base, Turbo\nworkload = w.txt\n";
  CHECK_THROWS_AS(parse_sweep_spec(d / "bad1.txt"), ConfigError);
  std::ofstream(d / "bad2.txt") << "variants =\nworkload = w.txt\n";
  CHECK_THROWS_AS(parse_sweep_spec(d / "bad2.txt"), ConfigError);
  std::ofstream(d / "bad3.txt") << "seeds = 1\n";
  CHECK_THROWS_AS(parse_sweep_spec(d / "bad3.txt"), ConfigError);
  std::ofstream(d / "bad4.txt") << "colour = red\nworkload = w.txt\n";
  CHECK_THROWS_AS(parse_sweep_spec(d / "bad4.txt"), ConfigError);
}

TEST_CASE("cli: run twice gives identical CSVs") {
  auto d = scratch("run");
  write_tiny_workload(d / "w.txt");
  auto cmd = [&](const std::string& out) {
    return fmt::format("{} run --workload {} --variant Full --seed 4 --out {} --hist {}.hist", kCli,
                       (d / "w.txt").string(), (d / out).string(), (d / out).string());
  };
  REQUIRE(sh(cmd("a.csv")) == 0);
  REQUIRE(sh(cmd("b.csv")) == 0);
  auto a = slurp(d / "a.csv");
  CHECK(line_count(a) == 2);
  CHECK(a == slurp(d / "b.csv"));
  CHECK(slurp(d / "a.csv.hist") == slurp(d / "b.csv.hist"));
  CHECK(slurp(d / "a.csv.hist").rfind("bin_low_ps,bin_high_ps,count\n", 0) == 0);

  // A second run into the same file appends a row.
  REQUIRE(sh(cmd("a.csv")) == 0);
  CHECK(line_count(slurp(d / "a.csv")) == 3);
}

TEST_CASE("cli: --dram-only leaves the SSD idle") {
  auto d = scratch("dram");
  write_tiny_workload(d / "w.txt");
  REQUIRE(sh(fmt::format("{} run --workload {} --dram-only --out {}", kCli, (d / "w.txt").string(),
                         (d / "o.csv").string())) == 0);
  std::istringstream in(slurp(d / "o.csv"));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  auto cols = csv_columns();
  std::vector<std::string> vals;
  std::string cell;
  std::istringstream rs(row);
  while (std::getline(rs, cell, ',')) vals.push_back(cell);
  for (size_t i = 0; i < cols.size() && i < vals.size(); ++i) {
    if (cols[i] == "flash_read_bytes" || cols[i] == "flash_write_bytes" || cols[i] == "s_r_h_count" ||
        cols[i] == "s_r_m_count" || cols[i] == "s_w_count" || cols[i] == "ssd_bw_utilization") {
      INFO(cols[i]);
      CHECK(std::stod(vals[i]) == 0.0);
    }
  }
}

TEST_CASE("cli: errors exit nonzero") {
  auto d = scratch("err");
  CHECK(sh(fmt::format("{} run --traces {}", kCli, (d / "missing").string())) != 0);
  std::ofstream(d / "w.txt") << "write_ratio = 1.5\n";
  CHECK(sh(fmt::format("{} run --workload {}", kCli, (d / "w.txt").string())) != 0);
  CHECK(sh(fmt::format("{} gen-trace {} {}", kCli, (d / "w.txt").string(), (d / "t").string())) != 0);
  write_tiny_workload(d / "ok.txt");
  CHECK(sh(fmt::format("{} run --workload {} --variant Turbo", kCli, (d / "ok.txt").string())) != 0);
  CHECK(sh(fmt::format("{} run --workload {} --set 'no_such_knob = 1'", kCli, (d / "ok.txt").string())) != 0);
}

TEST_CASE("cli: gen-trace writes one file per thread plus a manifest") {
  auto d = scratch("gen");
  std::ofstream(d / "w.txt") << "name = g\nfootprint_bytes = 65536\nthread_count = 4\nops_per_thread = 100\n";
  REQUIRE(sh(fmt::format("{} gen-trace {} {}", kCli, (d / "w.txt").string(), (d / "a").string())) == 0);
  REQUIRE(sh(fmt::format("{} gen-trace {} {}", kCli, (d / "w.txt").string(), (d / "b").string())) == 0);
  size_t files = 0;
  for (const auto& e : fs::directory_iterator(d / "a")) {
    ++files;
    CHECK(slurp(e.path()) == slurp(d / "b" / e.path().filename()));
  }
  CHECK(files == 5);
  CHECK(fs::exists(d / "a" / "manifest.txt"));
  auto set = read_trace_set(d / "a");
  CHECK(set.threads.size() == 4);
}

TEST_CASE("cli: sweep runs every point, skips finished ones, and is parallelism-independent") {
  auto d = scratch("sweep");
  write_tiny_workload(d / "w.txt");
  std::ofstream(d / "s.txt") << "variants = Base, Full\nthreads = 2\nseeds = 1, 2\nworkload = w.txt\n";
  const auto spec = (d / "s.txt").string();
  REQUIRE(sh(fmt::format("{} sweep {} {} --parallel 1", kCli, spec, (d / "serial").string())) == 0);
  REQUIRE(sh(fmt::format("{} sweep {} {} --parallel 3", kCli, spec, (d / "par").string())) == 0);
  auto serial = slurp(d / "serial" / "results.csv");
  CHECK(line_count(serial) == 5);
  CHECK(serial == slurp(d / "par" / "results.csv"));

  // Interrupted sweep: drop one finished point and poison another; only the
  // missing one reruns.
  fs::remove(d / "serial" / "runs" / "Full_t2_ULL_log-_cache-_s2.csv");
  auto keep = d / "serial" / "runs" / "Base_t2_ULL_log-_cache-_s1.csv";
  auto before = fs::last_write_time(keep);
  FILE* p = popen(fmt::format("{} sweep {} {} --parallel 2", kCli, spec, (d / "serial").string()).c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[256];
  while (fgets(buf, sizeof buf, p)) out += buf;
  CHECK(pclose(p) == 0);
  CHECK(out.find("4 combinations, 3 skipped, 0 failed") != std::string::npos);
  CHECK(fs::last_write_time(keep) == before);
  CHECK(slurp(d / "serial" / "results.csv") == serial);
}

TEST_CASE("cli: a failing point is recorded and the sweep exits nonzero") {
  auto d = scratch("sweepfail");
  write_tiny_workload(d / "w.txt");
  // A 1 TB log cannot fit the SSD DRAM, so that point fails validation.
  std::ofstream(d / "s.txt") << "variants = Full\nthreads = 2\nwrite_log_sizes = 1048576, 1099511627776\n"
                                "workload = w.txt\n";
  CHECK(sh(fmt::format("{} sweep {} {}", kCli, (d / "s.txt").string(), (d / "o").string())) != 0);
  auto failures = slurp(d / "o" / "failures.txt");
  CHECK(failures.find("log1099511627776") != std::string::npos);
  CHECK(line_count(slurp(d / "o" / "results.csv")) == 2);
}
