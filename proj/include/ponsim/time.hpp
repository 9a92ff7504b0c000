#pragma once

#include <cstdint>
#include <stdexcept>

namespace ponsim {

/// Simulation time in integer picoseconds. Picoseconds keep per-byte wire
/// times exact: one byte at 25 Gbps is 320 ps, at 100 Gbps 80 ps, so
/// schedule arithmetic never accumulates floating-point drift.
using SimTime = std::int64_t;

inline constexpr SimTime kPsPerNs = 1'000;
inline constexpr SimTime kPsPerUs = 1'000'000;
inline constexpr SimTime kPsPerMs = 1'000'000'000;
inline constexpr SimTime kPsPerSec = 1'000'000'000'000;

/// Fiber propagation: 5 us/km, i.e. 5000 ps per meter.
inline constexpr SimTime kPsPerMeter = 5'000;

constexpr SimTime micros(std::int64_t us) { return us * kPsPerUs; }
constexpr SimTime millis(std::int64_t ms) { return ms * kPsPerMs; }
constexpr SimTime seconds(std::int64_t s) { return s * kPsPerSec; }

constexpr SimTime propagation_delay(std::int64_t distance_m) {
  return distance_m * kPsPerMeter;
}

/// Exact wire time of one byte at the given line rate. Rates that do not
/// divide 8e12 evenly (i.e. whose byte time is not an integer number of
/// picoseconds) are rejected at configuration time.
inline std::int64_t ps_per_byte(std::int64_t bits_per_s) {
  if (bits_per_s <= 0 || (8 * kPsPerSec) % bits_per_s != 0) {
    throw std::invalid_argument("line rate must divide 8e12 ps evenly");
  }
  return 8 * kPsPerSec / bits_per_s;
}

constexpr SimTime tx_time(std::int64_t bytes, std::int64_t byte_time_ps) {
  return bytes * byte_time_ps;
}

}  // namespace ponsim
