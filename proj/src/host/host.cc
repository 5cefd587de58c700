#include "cxlsim/host/host.hh"

#include <algorithm>
#include <bit>

#include <fmt/core.h>

namespace cxlsim {

namespace {
constexpr uint64_t kHostLineBase = uint64_t{1} << 60;
}

Host::Host(EventQueue& eq, const SimConfig& cfg, const std::vector<ThreadTrace>& traces, PageTable& pt,
           HostDram& dram, CxlLink& link, MigrationManager* migration)
    : eq_(eq),
      cfg_(cfg),
      pt_(pt),
      dram_(dram),
      link_(link),
      mig_(migration),
      cycle_(cfg.cycle()),
      private_hit_(cfg.cycle() * cfg.private_hit_cycles),
      llc_hit_(cfg.cycle() * cfg.llc_hit_cycles),
      llc_(cfg.llc_size_byte, cfg.llc_way),
      sched_(cfg.t_policy, cfg.seed) {
  if (cfg.cores == 0 || cfg.cores > 64) throw ConfigError("cores must be in [1, 64]");
  threads_.resize(traces.size());
  for (size_t i = 0; i < traces.size(); ++i) {
    threads_[i].id = static_cast<uint32_t>(i);
    threads_[i].trace = &traces[i];
  }
  cores_.reserve(cfg.cores);
  for (uint32_t c = 0; c < cfg.cores; ++c) {
    cores_.emplace_back(PresenceCache(cfg.private_cache_size_byte, cfg.private_cache_way));
    cores_.back().id = c;
  }
}

uint64_t Host::line_key(const Target& t) {
  return (t.host ? kHostLineBase : 0) + t.id * kLinesPerPage + t.line;
}

uint32_t Host::running_thread(uint32_t core) const {
  const Core& c = cores_.at(core);
  return c.thread < 0 ? UINT32_MAX : static_cast<uint32_t>(c.thread);
}

void Host::start() {
  size_t placed = std::min<size_t>(threads_.size(), cores_.size());
  for (size_t i = 0; i < placed; ++i) {
    Core& c = cores_[i];
    Thread& th = threads_[i];
    c.thread = static_cast<int>(i);
    th.state = Thread::State::kRunning;
    th.run_start = eq_.now();
    set_mode(c, Mode::kRunning);
    schedule_step(c, eq_.now());
  }
  for (size_t i = placed; i < threads_.size(); ++i) sched_.make_runnable(threads_[i]);
  if (threads_.empty()) finish_time_ = eq_.now();
}

void Host::set_mode(Core& c, Mode m) {
  SimTime d = eq_.now() - c.mode_since;
  switch (c.mode) {
    case Mode::kIdle: c.time.idle += d; break;
    case Mode::kSwitching: c.time.switching += d; break;
    case Mode::kRunning: c.time.running += d; break;
  }
  c.mode = m;
  c.mode_since = eq_.now();
}

std::vector<CoreTime> Host::core_times(SimTime end) const {
  std::vector<CoreTime> out;
  for (const Core& c : cores_) {
    CoreTime t = c.time;
    SimTime d = end > c.mode_since ? end - c.mode_since : SimTime{};
    switch (c.mode) {
      case Mode::kIdle: t.idle += d; break;
      case Mode::kSwitching: t.switching += d; break;
      case Mode::kRunning: t.running += d; break;
    }
    out.push_back(t);
  }
  return out;
}

uint64_t Host::retired_instructions() const {
  uint64_t n = 0;
  for (const Thread& th : threads_) {
    n += th.window.empty() ? th.next_instr : th.window.front().instr_idx;
  }
  return n;
}

void Host::account_runtime(Thread& th) { th.received_exec_time += eq_.now() - th.run_start; }

void Host::tlb_shootdown() {
  SimTime share = SimTime::from_ps(cfg_.tlb_shootdown_ns * 1000 / cores_.size());
  for (Core& c : cores_) {
    if (c.mode == Mode::kRunning) c.stall_until = max(c.stall_until, eq_.now()) + share;
  }
}

void Host::schedule_step(Core& c, SimTime at) {
  uint64_t token = ++c.step_token;
  c.blocked = Blocked::kNone;
  uint32_t id = c.id;
  eq_.schedule(at, [this, id, token] {
    Core& core = cores_[id];
    if (core.step_token == token) step(core);
  }, ComponentId::kCore);
}

void Host::step(Core& c) {
  if (c.mode != Mode::kRunning) return;
  if (eq_.now() < c.stall_until) {
    schedule_step(c, c.stall_until);
    return;
  }
  Thread& th = threads_[c.thread];
  if (th.issued_all()) {
    if (th.window.empty()) {
      thread_exit(c);
    } else {
      c.blocked = Blocked::kWindow;
    }
    return;
  }
  const uint64_t occupancy = th.window_occupancy();
  if (occupancy >= cfg_.window_size) {
    c.blocked = Blocked::kWindow;
    return;
  }
  const TraceOp& op = th.trace->ops[th.op_idx];
  if (op.kind == OpKind::kCompute) {
    uint64_t left = op.value - th.op_progress;
    uint64_t k = th.window.empty() ? left : std::min<uint64_t>(left, cfg_.window_size - occupancy);
    th.op_progress += k;
    th.next_instr += k;
    if (th.op_progress == op.value) {
      ++th.op_idx;
      th.op_progress = 0;
    }
    c.time.compute_cycles += k;
    c.compute_until = eq_.now() + cycle_ * k;
    schedule_step(c, c.compute_until);
    return;
  }
  const bool store = op.kind == OpKind::kWrite;
  if (store) {
    issue_store(th, op.value);
  } else if (!issue_load(c, th, op.value)) {
    ++stats_.mshr_stalls;
    c.blocked = Blocked::kMshr;
    return;
  }
  ++th.op_idx;
  ++th.next_instr;
  schedule_step(c, eq_.now() + cycle_);
  if (store) try_retire(c);
}

bool Host::issue_load(Core& c, Thread& th, uint64_t vaddr) {
  const uint64_t vpn = vaddr / kPageBytes;
  const auto line_no = static_cast<uint32_t>((vaddr % kPageBytes) / kLineBytes);
  const PageLocation& loc = pt_.at(vpn);
  Target t{false, loc.id, line_no};
  if (loc.where == PageLocation::Where::kHostDram) {
    t.host = true;
  } else if (mig_) {
    auto r = mig_->route_read(vpn, line_no);
    if (r.host) t = Target{true, r.frame, line_no};
  }
  const uint64_t line = line_key(t);

  const bool priv_hit = c.priv.contains(line);
  const bool llc_hit = !priv_hit && llc_.contains(line);
  auto pm = c.mshr.find(line);
  if (!priv_hit && !llc_hit && pm == c.mshr.end()) {
    if (c.mshr.size() >= cfg_.private_mshrs) return false;
    if (!llc_mshr_.contains(line) && llc_mshr_.size() >= cfg_.llc_mshrs) return false;
  }
  if (t.host && mig_) mig_->touch_frame(t.id, eq_.now());

  PendingOp op;
  op.op_id = next_op_id_++;
  op.instr_idx = th.next_instr;
  op.trace_idx = th.op_idx;
  op.issued = eq_.now();
  op.vaddr = vaddr;
  op.line = line;

  if (priv_hit || llc_hit) {
    c.priv.lookup(line);
    if (llc_hit) {
      llc_.lookup(line);
      c.priv.fill(line);
    }
    ++stats_.onchip_hits;
    SimTime lat = priv_hit ? private_hit_ : llc_hit_;
    uint32_t tid = th.id;
    uint64_t id = op.op_id;
    th.window.push_back(op);
    eq_.schedule(eq_.now() + lat, [this, tid, id] { complete_onchip(tid, id); }, ComponentId::kCache);
    return true;
  }
  c.priv.lookup(line);  // counts the miss
  llc_.lookup(line);
  op.offchip = true;
  th.window.push_back(op);

  if (pm != c.mshr.end()) {
    pm->second.push_back(op.op_id);
    return true;
  }
  c.mshr[line].push_back(op.op_id);
  stats_.max_private_mshr = std::max<uint32_t>(stats_.max_private_mshr, static_cast<uint32_t>(c.mshr.size()));
  auto le = llc_mshr_.find(line);
  if (le != llc_mshr_.end()) {
    le->second.cores |= uint64_t{1} << c.id;
    if (th.wait_for_data) le->second.no_delay = true;
    if (le->second.delayed) {
      // Waiters already got a delay NDR; ask again for the newcomer.
      le->second.delayed = false;
      le->second.id = next_llc_id_++;
      ++stats_.fresh_reissues;
      send_downstream(line, le->second, eq_.now() + llc_hit_);
    }
    return true;
  }
  LlcEntry e;
  e.id = next_llc_id_++;
  e.cores = uint64_t{1} << c.id;
  e.target = t;
  e.no_delay = th.wait_for_data;
  llc_mshr_[line] = e;
  ++stats_.llc_mshr_allocs;
  stats_.max_llc_mshr = std::max<uint32_t>(stats_.max_llc_mshr, static_cast<uint32_t>(llc_mshr_.size()));
  send_downstream(line, e, eq_.now() + llc_hit_);
  return true;
}

void Host::send_downstream(uint64_t line, const LlcEntry& e, SimTime at) {
  ++stats_.downstream_reads;
  const uint64_t id = e.id;
  if (e.target.host) {
    SimTime done = dram_.access(at);
    eq_.schedule(done, [this, line, id] {
      on_response(line, id, S2MResponse::mem_data(0, 0, RequestClass::kHostRead));
    }, ComponentId::kHostDram);
    return;
  }
  M2SRequest req;
  req.kind = M2SKind::kMemRd;
  req.addr = device_addr(e.target.id, e.target.line);
  req.no_delay = e.no_delay;
  eq_.schedule(at, [this, req, line, id] {
    link_.send_request(req, [this, line, id](const S2MResponse& r) { on_response(line, id, r); });
  }, ComponentId::kCache);
}

PendingOp* Host::find_op(Thread& th, uint64_t op_id) {
  for (auto& op : th.window) {
    if (op.op_id == op_id) return &op;
    if (op.op_id > op_id) break;
  }
  return nullptr;
}

void Host::complete_onchip(uint32_t tid, uint64_t op_id) {
  Thread& th = threads_[tid];
  PendingOp* op = find_op(th, op_id);
  if (!op) return;  // squashed
  op->done = true;
  op->completed = eq_.now();
  for (Core& c : cores_) {
    if (c.thread == static_cast<int>(tid) && c.mode == Mode::kRunning) {
      try_retire(c);
      break;
    }
  }
}

void Host::on_response(uint64_t line, uint64_t id, const S2MResponse& resp) {
  auto it = llc_mshr_.find(line);
  if (it == llc_mshr_.end() || it->second.id != id) {
    ++stats_.stale_responses;
    return;
  }
  LlcEntry& e = it->second;
  const uint64_t cores = e.cores;
  if (resp.is_delay()) {
    e.delayed = true;
    for (uint64_t m = cores; m; m &= m - 1) {
      Core& c = cores_[std::countr_zero(m)];
      auto pm = c.mshr.find(line);
      if (pm == c.mshr.end() || c.thread < 0) continue;
      Thread& th = threads_[c.thread];
      for (uint64_t op_id : pm->second) {
        if (PendingOp* op = find_op(th, op_id)) op->marked = true;
      }
    }
    for (uint64_t m = cores; m; m &= m - 1) {
      Core& c = cores_[std::countr_zero(m)];
      if (c.mode == Mode::kRunning) try_retire(c);
    }
    return;
  }
  llc_mshr_.erase(it);
  ++stats_.llc_mshr_fills;
  llc_.fill(line);
  for (uint64_t m = cores; m; m &= m - 1) {
    Core& c = cores_[std::countr_zero(m)];
    auto pm = c.mshr.find(line);
    if (pm == c.mshr.end()) continue;
    c.priv.fill(line);
    if (c.thread >= 0) {
      Thread& th = threads_[c.thread];
      for (uint64_t op_id : pm->second) {
        if (PendingOp* op = find_op(th, op_id)) {
          op->done = true;
          op->marked = false;
          op->completed = eq_.now();
          op->service = resp.service;
        }
      }
    }
    c.mshr.erase(pm);
  }
  for (uint64_t m = cores; m; m &= m - 1) {
    Core& c = cores_[std::countr_zero(m)];
    if (c.mode == Mode::kRunning) try_retire(c);
  }
  wake_mshr_blocked();
}

void Host::wake_mshr_blocked() {
  for (Core& c : cores_) {
    if (c.mode == Mode::kRunning && c.blocked == Blocked::kMshr) schedule_step(c, eq_.now());
  }
}

void Host::issue_store(Thread& th, uint64_t vaddr) {
  PendingOp op;
  op.op_id = next_op_id_++;
  op.instr_idx = th.next_instr;
  op.trace_idx = th.op_idx;
  op.issued = eq_.now();
  op.vaddr = vaddr;
  op.is_write = true;
  th.window.push_back(op);
}

void Host::try_retire(Core& c) {
  if (c.thread < 0 || c.mode != Mode::kRunning) return;
  Thread& th = threads_[c.thread];
  bool retired = false;
  while (!th.window.empty()) {
    PendingOp& f = th.window.front();
    if (f.is_write) {
      if (c.sb_used >= cfg_.store_buffer_entries) break;
      PendingOp op = f;
      th.window.pop_front();
      commit_store(c, th, op);
      retired = true;
      continue;
    }
    if (f.done) {
      th.wait_for_data = false;
      if (f.offchip) {
        SimTime lat = f.completed - f.issued;
        amat_.record(f.service, lat > llc_hit_ ? (lat - llc_hit_).ps : 0);
      }
      th.window.pop_front();
      retired = true;
      continue;
    }
    if (f.marked) {
      raise_exception(c);
      return;
    }
    break;
  }
  if (retired && c.blocked == Blocked::kWindow) schedule_step(c, eq_.now());
}

void Host::commit_store(Core& c, Thread& th, const PendingOp& op) {
  const uint64_t vpn = op.vaddr / kPageBytes;
  const auto line_no = static_cast<uint32_t>((op.vaddr % kPageBytes) / kLineBytes);
  const uint64_t token = store_token(th.id, op.trace_idx);
  if (record_commits_) commits_.emplace_back(op.vaddr / kLineBytes, token);

  const PageLocation& loc = pt_.at(vpn);
  std::optional<uint64_t> frame;
  if (loc.where == PageLocation::Where::kHostDram) {
    frame = loc.id;
  } else if (mig_) {
    auto r = mig_->route_write(vpn, line_no);
    if (r.host) frame = r.frame;
  }
  ++c.sb_used;
  const uint32_t cid = c.id;
  const SimTime start = eq_.now();
  if (frame) {
    auto& fr = pt_.frame(*frame);
    fr.data[line_no] = token;
    fr.dirty = true;
    if (mig_) mig_->touch_frame(*frame, eq_.now());
    SimTime done = dram_.access(eq_.now());
    eq_.schedule(done, [this, cid, start] {
      Core& core = cores_[cid];
      --core.sb_used;
      amat_.record(RequestClass::kHostWrite, (eq_.now() - start).ps);
      try_retire(core);
    }, ComponentId::kHostDram);
    return;
  }
  M2SRequest req;
  req.kind = M2SKind::kMemWr;
  req.addr = device_addr(loc.id, line_no);
  req.data = token;
  link_.send_request(req, [this, cid, start](const S2MResponse&) {
    Core& core = cores_[cid];
    --core.sb_used;
    amat_.record(RequestClass::kSsdWrite, (eq_.now() - start).ps);
    try_retire(core);
  });
}

void Host::squash(Core& c, Thread& th) {
  for (const PendingOp& op : th.window) {
    amat_.record_squashed();
    if (op.is_write || op.done || !op.offchip) continue;
    auto pm = c.mshr.find(op.line);
    if (pm == c.mshr.end()) continue;
    auto& w = pm->second;
    w.erase(std::remove(w.begin(), w.end(), op.op_id), w.end());
    if (!w.empty()) continue;
    c.mshr.erase(pm);
    auto le = llc_mshr_.find(op.line);
    if (le == llc_mshr_.end()) continue;
    le->second.cores &= ~(uint64_t{1} << c.id);
    if (le->second.cores == 0) {
      llc_mshr_.erase(le);
      ++stats_.llc_mshr_squash_frees;
    }
  }
  const PendingOp& head = th.window.front();
  th.op_idx = head.trace_idx;
  th.op_progress = 0;
  th.next_instr = head.instr_idx;
  th.window.clear();
  if (c.compute_until > eq_.now()) {
    c.time.compute_cycles -= (c.compute_until - eq_.now()).ps / cycle_.ps;
    c.compute_until = eq_.now();
  }
  ++c.step_token;  // cancel any pending step
  c.blocked = Blocked::kNone;
}

void Host::raise_exception(Core& c) {
  Thread& th = threads_[c.thread];
  ++th.exceptions;
  ++stats_.exceptions;
  squash(c, th);
  account_runtime(th);
  sched_.make_runnable(th);
  auto next = sched_.pick(threads_);
  if (*next == th.id) {
    // Nobody else can use the core: replay right away, no switch cost, and
    // let the replay wait for its data.
    th.wait_for_data = true;
    th.state = Thread::State::kRunning;
    th.run_start = eq_.now();
    schedule_step(c, max(eq_.now(), c.stall_until));
  } else {
    begin_switch(c, *next);
  }
  dispatch_idle();
  wake_mshr_blocked();
}

void Host::begin_switch(Core& c, uint32_t tid) {
  ++stats_.ctx_switches;
  set_mode(c, Mode::kSwitching);
  c.thread = static_cast<int>(tid);
  threads_[tid].state = Thread::State::kRunning;
  ++c.step_token;
  c.blocked = Blocked::kNone;
  const uint32_t cid = c.id;
  eq_.schedule(eq_.now() + SimTime::from_ns(cfg_.ctx_switch_overhead_ns), [this, cid] {
    Core& core = cores_[cid];
    set_mode(core, Mode::kRunning);
    threads_[core.thread].run_start = eq_.now();
    if (cfg_.cache_pollution_on_switch) core.priv.reset_recency();
    schedule_step(core, eq_.now());
  }, ComponentId::kScheduler);
}

void Host::thread_exit(Core& c) {
  Thread& th = threads_[c.thread];
  account_runtime(th);
  th.state = Thread::State::kDone;
  th.finished_at = eq_.now();
  ++done_threads_;
  finish_time_ = max(finish_time_, eq_.now());
  ++c.step_token;
  auto next = sched_.pick(threads_);
  if (next) {
    begin_switch(c, *next);
  } else {
    c.thread = -1;
    set_mode(c, Mode::kIdle);
  }
}

void Host::dispatch_idle() {
  for (Core& c : cores_) {
    if (sched_.empty()) return;
    if (c.mode == Mode::kIdle) begin_switch(c, *sched_.pick(threads_));
  }
}

}  // namespace cxlsim
