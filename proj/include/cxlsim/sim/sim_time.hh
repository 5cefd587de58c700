#pragma once

#include <compare>
#include <cstdint>
#include <limits>

namespace cxlsim {

// Simulated time in integer picoseconds. Also used for durations.
struct SimTime {
  uint64_t ps = 0;

  constexpr SimTime() = default;
  constexpr explicit SimTime(uint64_t picos) : ps(picos) {}

  static constexpr SimTime from_ps(uint64_t v) { return SimTime(v); }
  static constexpr SimTime from_ns(uint64_t v) { return SimTime(v * 1000); }
  static constexpr SimTime from_us(uint64_t v) { return SimTime(v * 1000 * 1000); }
  static constexpr SimTime max() { return SimTime(std::numeric_limits<uint64_t>::max()); }

  constexpr double as_ns() const { return static_cast<double>(ps) / 1e3; }
  constexpr double as_us() const { return static_cast<double>(ps) / 1e6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime& operator+=(SimTime o) {
    ps += o.ps;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime o) {
    ps -= o.ps;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime(a.ps + b.ps); }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime(a.ps - b.ps); }
  friend constexpr SimTime operator*(SimTime a, uint64_t k) { return SimTime(a.ps * k); }
  friend constexpr SimTime operator*(uint64_t k, SimTime a) { return SimTime(a.ps * k); }
};

constexpr SimTime max(SimTime a, SimTime b) { return a < b ? b : a; }
constexpr SimTime min(SimTime a, SimTime b) { return a < b ? a : b; }

namespace literals {
constexpr SimTime operator""_ps(unsigned long long v) { return SimTime::from_ps(v); }
constexpr SimTime operator""_ns(unsigned long long v) { return SimTime::from_ns(v); }
constexpr SimTime operator""_us(unsigned long long v) { return SimTime::from_us(v); }
}  // namespace literals

// Length of one clock period for a frequency given in MHz.
constexpr SimTime cycle_time_mhz(uint64_t mhz) { return SimTime(1'000'000 / mhz); }

}  // namespace cxlsim
