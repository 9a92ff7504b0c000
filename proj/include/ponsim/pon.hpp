#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ponsim/messages.hpp"
#include "ponsim/time.hpp"

namespace ponsim {

class OverlapDetected : public std::logic_error {
 public:
  explicit OverlapDetected(const std::string& what) : std::logic_error(what) {}
};

/// One upstream wavelength. `horizon` is the earliest instant the next burst
/// may begin; it only ever moves forward.
struct WavelengthChannel {
  std::int32_t id = 0;
  std::int64_t byte_time_ps = 320;  // 25 Gbit/s
  SimTime horizon = 0;
};

struct DrainedFrame {
  Frame frame;
  SimTime completion_time_at_olt = 0;
};

class Onu {
 public:
  Onu(OnuId id, OnuKind kind, std::int32_t customer_id, std::int64_t distance_m,
      std::int64_t guaranteed_bw_bps)
      : id_(id),
        kind_(kind),
        customer_id_(customer_id),
        distance_m_(distance_m),
        guaranteed_bw_bps_(guaranteed_bw_bps),
        prop_delay_ps_(propagation_delay(distance_m)) {}

  OnuId id() const { return id_; }
  OnuKind kind() const { return kind_; }
  std::int32_t customer_id() const { return customer_id_; }
  std::int64_t distance_m() const { return distance_m_; }
  std::int64_t guaranteed_bw_bps() const { return guaranteed_bw_bps_; }
  SimTime prop_delay() const { return prop_delay_ps_; }

  std::int64_t backlog_bytes() const { return backlog_bytes_; }
  std::size_t queue_depth() const { return queue_.size(); }
  const std::deque<Frame>& queue() const { return queue_; }

  std::optional<GateMsg> pending_grant;

  void enqueue(const Frame& frame) {
    if (!queue_.empty() && frame.arrival_time < queue_.back().arrival_time) {
      throw std::logic_error("frame enqueued out of arrival order");
    }
    queue_.push_back(frame);
    backlog_bytes_ += frame.size_bytes;
  }

  /// Drain whole frames FIFO while the cumulative payload fits the budget.
  /// The cursor starts at `start_time`; each frame's completion at the OLT is
  /// its serialization end plus upstream propagation. No fragmentation.
  std::vector<DrainedFrame> drain(std::int64_t budget_bytes, SimTime start_time,
                                  std::int64_t byte_time_ps) {
    std::vector<DrainedFrame> out;
    SimTime cursor = start_time;
    std::int64_t used = 0;
    while (!queue_.empty() && used + queue_.front().size_bytes <= budget_bytes) {
      const Frame f = queue_.front();
      queue_.pop_front();
      used += f.size_bytes;
      backlog_bytes_ -= f.size_bytes;
      cursor += tx_time(f.size_bytes, byte_time_ps);
      out.push_back(DrainedFrame{f, cursor + prop_delay_ps_});
    }
    return out;
  }

  ReportMsg generate_report(SimTime t) const {
    return ReportMsg{id_, backlog_bytes_, t};
  }

 private:
  OnuId id_;
  OnuKind kind_;
  std::int32_t customer_id_;
  std::int64_t distance_m_;
  std::int64_t guaranteed_bw_bps_;
  SimTime prop_delay_ps_;
  std::deque<Frame> queue_;
  std::int64_t backlog_bytes_ = 0;
};

/// Full execution of one granted window in a single pass (no frames arrive
/// mid-window). The live simulation performs the same drain incrementally so
/// it can extend a still-open window when new frames show up.
inline std::vector<DrainedFrame> execute_grant(Onu& onu, const GateMsg& gate,
                                               std::int64_t byte_time_ps) {
  return onu.drain(gate.length_bytes, gate.start_time, byte_time_ps);
}

/// Per-channel occupancy audit: every recorded burst must clear the previous
/// one by at least the guard time. Bursts must be recorded in start order,
/// which first-fit horizons guarantee.
class ChannelOccupancyChecker {
 public:
  ChannelOccupancyChecker(std::size_t n_channels, SimTime guard_ps)
      : guard_ps_(guard_ps), next_free_(n_channels, 0) {}

  void record(std::int32_t wavelength_id, SimTime start, SimTime end) {
    if (wavelength_id < 0 ||
        static_cast<std::size_t>(wavelength_id) >= next_free_.size()) {
      throw std::out_of_range("unknown wavelength id");
    }
    auto& next_free = next_free_[static_cast<std::size_t>(wavelength_id)];
    if (start < next_free) {
      throw OverlapDetected("burst at " + std::to_string(start) +
                            " ps starts inside guard window ending at " +
                            std::to_string(next_free) + " ps on wavelength " +
                            std::to_string(wavelength_id));
    }
    if (end < start) throw std::logic_error("burst ends before it starts");
    next_free = end + guard_ps_;
  }

 private:
  SimTime guard_ps_;
  std::vector<SimTime> next_free_;
};

}  // namespace ponsim
