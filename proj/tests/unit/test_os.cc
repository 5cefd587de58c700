#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "cxlsim/os/scheduler.hh"
#include "cxlsim/sim/rng.hh"

using namespace cxlsim;
using namespace cxlsim::literals;

namespace {

std::vector<Thread> threads(size_t n) {
  std::vector<Thread> t(n);
  for (size_t i = 0; i < n; ++i) t[i].id = static_cast<uint32_t>(i);
  return t;
}

}  // namespace

TEST_CASE("scheduler: RR rotates strictly") {
  auto ts = threads(3);
  Scheduler s(SchedPolicyKind::kRoundRobin, 1);
  for (auto& t : ts) s.make_runnable(t);
  std::vector<uint32_t> order;
  for (int i = 0; i < 9; ++i) {
    uint32_t id = *s.pick(ts);
    order.push_back(id);
    s.make_runnable(ts[id]);
  }
  CHECK(order == std::vector<uint32_t>{0, 1, 2, 0, 1, 2, 0, 1, 2});
}

TEST_CASE("scheduler: CFS picks the least received time") {
  auto ts = threads(3);
  ts[0].received_exec_time = 10_us;
  ts[1].received_exec_time = 4_us;
  ts[2].received_exec_time = 7_us;
  Scheduler s(SchedPolicyKind::kFairness, 1);
  for (auto& t : ts) s.make_runnable(t);
  CHECK(*s.pick(ts) == 1);
  CHECK(*s.pick(ts) == 2);
  CHECK(*s.pick(ts) == 0);
  CHECK(!s.pick(ts));
}

TEST_CASE("scheduler: CFS ties go to the lowest id") {
  auto ts = threads(3);
  Scheduler s(SchedPolicyKind::kFairness, 1);
  s.make_runnable(ts[2]);
  s.make_runnable(ts[0]);
  s.make_runnable(ts[1]);
  CHECK(*s.pick(ts) == 0);
}

TEST_CASE("scheduler: two equal threads under CFS stay within one run interval") {
  auto ts = threads(2);
  Scheduler s(SchedPolicyKind::kFairness, 1);
  for (auto& t : ts) s.make_runnable(t);
  Rng rng(4);
  SimTime longest;
  for (int i = 0; i < 100; ++i) {
    uint32_t id = *s.pick(ts);
    SimTime run = SimTime::from_ns(100 + rng.below(900));
    longest = max(longest, run);
    ts[id].received_exec_time += run;
    s.make_runnable(ts[id]);
    SimTime a = ts[0].received_exec_time, b = ts[1].received_exec_time;
    CHECK((a > b ? a - b : b - a) <= longest);
  }
}

TEST_CASE("scheduler: RANDOM is seeded and covers the pool") {
  auto ts = threads(4);
  auto draw = [&](uint64_t seed) {
    Scheduler s(SchedPolicyKind::kRandom, seed);
    for (auto& t : ts) s.make_runnable(t);
    std::vector<uint32_t> out;
    for (int i = 0; i < 4000; ++i) {
      uint32_t id = *s.pick(ts);
      out.push_back(id);
      s.make_runnable(ts[id]);
    }
    return out;
  };
  auto a = draw(1);
  CHECK(a == draw(1));
  CHECK(a != draw(2));
  std::map<uint32_t, int> hist;
  for (auto id : a) ++hist[id];
  for (auto& [id, n] : hist) {
    CHECK(n > 850);
    CHECK(n < 1150);
  }
}

TEST_CASE("scheduler: every runnable thread is eventually picked") {
  for (auto pol : {SchedPolicyKind::kRoundRobin, SchedPolicyKind::kRandom, SchedPolicyKind::kFairness}) {
    auto ts = threads(5);
    Scheduler s(pol, 3);
    for (auto& t : ts) s.make_runnable(t);
    std::vector<bool> seen(5, false);
    for (int i = 0; i < 200; ++i) {
      uint32_t id = *s.pick(ts);
      seen[id] = true;
      ts[id].received_exec_time += 1_us;
      s.make_runnable(ts[id]);
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
  }
}
