#pragma once

#include <cstdint>

#include "ponsim/time.hpp"

namespace ponsim {

using OnuId = std::int32_t;

enum class OnuKind : std::uint8_t { Mfh, Conventional };

/// Ethernet frame sizes are bounded by the standard min/max payload.
inline constexpr std::int64_t kMinFrameBytes = 64;
inline constexpr std::int64_t kMaxFrameBytes = 1518;

/// MPCP report control slot appended to every upstream burst.
inline constexpr std::int64_t kReportSlotBytes = 64;

struct Frame {
  std::int32_t size_bytes = 0;
  SimTime arrival_time = 0;  // enqueue instant at the ONU
};

struct ReportMsg {
  OnuId onu_id = -1;
  std::int64_t queue_bytes = 0;  // backlog at gen_time
  SimTime gen_time = 0;
};

struct GateMsg {
  OnuId onu_id = -1;
  std::int32_t wavelength_id = -1;
  SimTime start_time = 0;
  std::int64_t length_bytes = 0;  // payload budget, excluding the report slot
  std::int64_t cycle_tag = 0;
};

}  // namespace ponsim
