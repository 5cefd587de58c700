// Command line driver: run, sweep, gen-trace.

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <cstring>
#include <fcntl.h>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "cxlsim/driver/runner.hh"
#include "cxlsim/driver/sweep.hh"
#include "cxlsim/driver/system.hh"
#include "cxlsim/driver/variant.hh"
#include "cxlsim/trace/workload.hh"

extern char** environ;

namespace fs = std::filesystem;
using namespace cxlsim;

namespace {

struct RunArgs {
  std::string config;
  std::string variant = "Full";
  uint32_t threads = 0;
  std::optional<uint64_t> seed;
  std::string out;
  std::string hist;
  bool dram_only = false;
  std::string flash_profile;
  std::string traces;
  std::string workload;
  std::vector<std::string> sets;
};

int cmd_run(const RunArgs& a) {
  SimConfig cfg = a.config.empty() ? SimConfig{} : load_config(a.config);
  for (const auto& kv : a.sets) apply_config_text(cfg, kv, "--set");
  if (a.seed) cfg.seed = *a.seed;
  if (!a.flash_profile.empty()) cfg.flash_profile = parse_flash_profile(a.flash_profile);
  std::string variant = a.dram_only ? "DRAM-Only" : a.variant;

  TraceSet traces;
  if (!a.traces.empty()) {
    traces = read_trace_set(a.traces);
  } else if (!a.workload.empty()) {
    WorkloadSpec spec = load_workload_spec(a.workload);
    if (a.seed) spec.seed = *a.seed;
    traces = generate_trace_set(scale_threads(spec, a.threads));
  } else {
    throw std::runtime_error("run needs --traces or --workload");
  }
  if (traces.threads.empty()) throw std::runtime_error("trace set has no threads");

  SimConfig run_cfg = cfg;
  apply_variant(run_cfg, variant);
  System sys(run_cfg, std::move(traces));
  sys.run();
  RunRecord rec = sys.record(variant);
  if (a.out.empty()) {
    std::cout << csv_header() << '\n' << csv_row(rec) << '\n';
  } else {
    append_csv(a.out, rec);
  }
  if (!a.hist.empty()) write_histogram_csv(a.hist, rec.amat.histogram());
  return 0;
}

int cmd_gen_trace(const std::string& spec_file, const std::string& out_dir) {
  WorkloadSpec spec = load_workload_spec(spec_file);
  write_trace_set(generate_trace_set(spec), out_dir);
  return 0;
}

std::vector<std::string> child_args(const SweepSpec& spec, const SweepPoint& p, const fs::path& csv) {
  std::vector<std::string> args = {"cxlsim", "run", "--variant", p.variant, "--threads", std::to_string(p.threads),
                                   "--seed", std::to_string(p.seed), "--flash-profile", p.flash_profile,
                                   "--out", csv.string()};
  if (!spec.config.empty()) args.insert(args.end(), {"--config", spec.config});
  if (!spec.workload.empty()) args.insert(args.end(), {"--workload", spec.workload});
  if (!spec.traces.empty()) args.insert(args.end(), {"--traces", spec.traces});
  if (p.write_log_size) args.insert(args.end(), {"--set", fmt::format("write_log_size_byte = {}", *p.write_log_size)});
  if (p.ssd_cache_size) args.insert(args.end(), {"--set", fmt::format("ssd_cache_size_byte = {}", *p.ssd_cache_size)});
  return args;
}

pid_t spawn(const std::vector<std::string>& args, const fs::path& log) {
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, STDOUT_FILENO, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&fa, STDOUT_FILENO, STDERR_FILENO);
  std::vector<char*> argv;
  for (const auto& s : args) argv.push_back(const_cast<char*>(s.c_str()));
  argv.push_back(nullptr);
  pid_t pid = -1;
  int rc = posix_spawn(&pid, "/proc/self/exe", &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw std::runtime_error(fmt::format("posix_spawn failed: {}", std::strerror(rc)));
  return pid;
}

int cmd_sweep(const std::string& spec_file, const std::string& out_dir, unsigned parallel) {
  SweepSpec spec = parse_sweep_spec(spec_file);
  auto points = expand(spec);
  fs::path runs = fs::path(out_dir) / "runs";
  fs::create_directories(runs);
  parallel = std::max(1u, parallel);

  std::map<pid_t, size_t> live;
  std::vector<std::string> failures;
  size_t next = 0;
  size_t skipped = 0;
  auto reap_one = [&] {
    int status = 0;
    pid_t pid = waitpid(-1, &status, 0);
    if (pid < 0) throw std::runtime_error("waitpid failed");
    auto it = live.find(pid);
    if (it == live.end()) return;
    const SweepPoint& p = points[it->second];
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      failures.push_back(p.stem());
      fs::remove(runs / (p.stem() + ".csv"));
    }
    live.erase(it);
  };
  while (next < points.size() || !live.empty()) {
    while (next < points.size() && live.size() < parallel) {
      const SweepPoint& p = points[next];
      fs::path csv = runs / (p.stem() + ".csv");
      if (fs::exists(csv)) {
        ++skipped;
        ++next;
        continue;
      }
      pid_t pid = spawn(child_args(spec, p, csv), runs / (p.stem() + ".log"));
      live[pid] = next++;
    }
    if (!live.empty()) reap_one();
  }

  std::ofstream agg(fs::path(out_dir) / "results.csv");
  agg << csv_header() << '\n';
  for (const auto& p : points) {
    std::ifstream in(runs / (p.stem() + ".csv"));
    std::string header, row;
    if (in && std::getline(in, header) && std::getline(in, row)) agg << row << '\n';
  }
  std::ofstream fail_log(fs::path(out_dir) / "failures.txt");
  for (const auto& f : failures) fail_log << f << '\n';
  fmt::print("{} combinations, {} skipped, {} failed\n", points.size(), skipped, failures.size());
  return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CXL memory-semantic SSD simulator"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run one simulation");
  run->add_option("--config", ra.config, "config file (key = value)");
  run->add_option("--variant", ra.variant, "Base, C, P, W, CP, WP, Full or DRAM-Only");
  run->add_option("--threads", ra.threads, "thread count (workload mode; total work held fixed)");
  run->add_option("--seed", ra.seed, "simulation and trace seed");
  run->add_option("--out", ra.out, "result CSV, row appended (stdout when omitted)");
  run->add_option("--hist", ra.hist, "latency histogram CSV");
  run->add_flag("--dram-only", ra.dram_only, "place every page in host DRAM");
  run->add_option("--flash-profile", ra.flash_profile, "ULL, ULL2, SLC or MLC");
  auto* tr = run->add_option("--traces", ra.traces, "trace directory with manifest.txt");
  auto* wl = run->add_option("--workload", ra.workload, "workload spec to generate traces from");
  tr->excludes(wl);
  run->add_option("--set", ra.sets, "extra config line, e.g. 'cs_threshold = 4000'");

  std::string sweep_spec, sweep_out;
  unsigned parallel = 1;
  auto* sweep = app.add_subcommand("sweep", "run a cartesian sweep as child processes");
  sweep->add_option("spec", sweep_spec, "sweep spec file")->required();
  sweep->add_option("out_dir", sweep_out, "output directory")->required();
  sweep->add_option("--parallel", parallel, "max concurrent runs");

  std::string gen_spec, gen_out;
  auto* gen = app.add_subcommand("gen-trace", "generate a synthetic trace set");
  gen->add_option("spec", gen_spec, "workload spec file")->required();
  gen->add_option("out_dir", gen_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(ra);
    if (*sweep) return cmd_sweep(sweep_spec, sweep_out, parallel);
    if (*gen) return cmd_gen_trace(gen_spec, gen_out);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
