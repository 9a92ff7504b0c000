#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ponsim/messages.hpp"
#include "ponsim/time.hpp"

namespace ponsim {

enum class EventKind : std::uint8_t {
  FrameArrival,
  ReportArrivalAtOlt,
  GateArrivalAtOnu,
  TransmissionStart,
  TransmissionEnd,
  BurstEmission,
  SimEnd,
};

struct FrameArrivalEv {
  OnuId onu = -1;
  std::int32_t size_bytes = 0;
};

struct ReportArrivalAtOltEv {
  ReportMsg report;
};

struct GateArrivalAtOnuEv {
  GateMsg gate;
};

struct TransmissionStartEv {
  OnuId onu = -1;
};

/// Candidate end of an upstream burst's payload section. The handler either
/// extends the burst (more eligible frames arrived meanwhile) or closes the
/// window and emits the piggybacked report.
struct TransmissionEndEv {
  OnuId onu = -1;
};

struct BurstEmissionEv {
  OnuId onu = -1;
  std::uint64_t period_index = 0;
};

struct SimEndEv {};

using EventPayload =
    std::variant<FrameArrivalEv, ReportArrivalAtOltEv, GateArrivalAtOnuEv,
                 TransmissionStartEv, TransmissionEndEv, BurstEmissionEv,
                 SimEndEv>;

struct Event {
  SimTime time = 0;
  std::uint64_t seq = 0;  // insertion order, breaks timestamp ties
  EventPayload payload;

  EventKind kind() const { return static_cast<EventKind>(payload.index()); }
};

static_assert(std::is_same_v<std::variant_alternative_t<
                                 static_cast<std::size_t>(EventKind::SimEnd),
                                 EventPayload>,
                             SimEndEv>,
              "EventPayload alternatives must follow EventKind order");

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::FrameArrival: return "FrameArrival";
    case EventKind::ReportArrivalAtOlt: return "ReportArrivalAtOlt";
    case EventKind::GateArrivalAtOnu: return "GateArrivalAtOnu";
    case EventKind::TransmissionStart: return "TransmissionStart";
    case EventKind::TransmissionEnd: return "TransmissionEnd";
    case EventKind::BurstEmission: return "BurstEmission";
    case EventKind::SimEnd: return "SimEnd";
  }
  return "?";
}

/// Raised when an event is scheduled before the current clock. This is a
/// logic bug in the caller; the run must abort.
class SchedulingInPast : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Deterministic discrete-event engine. Events are dispatched in strict
/// (time, seq) order, so replaying the same insertions yields the same
/// dispatch sequence.
class Engine {
 public:
  using Handler = std::function<void(const Event&)>;

  SimTime now() const { return now_; }

  void set_handler(Handler h) { handler_ = std::move(h); }

  /// Optional event trace: one line per dispatched event.
  void set_trace(std::ostream* os) { trace_ = os; }

  std::uint64_t schedule(SimTime t, EventPayload payload) {
    if (t < now_) {
      throw SchedulingInPast("schedule_event at t=" + std::to_string(t) +
                             " before clock=" + std::to_string(now_));
    }
    const std::uint64_t id = next_seq_++;
    queue_.push(Event{t, id, std::move(payload)});
    return id;
  }

  /// Dispatches every event with time <= t_end, then advances the clock to
  /// t_end. Returns the number of events dispatched.
  std::uint64_t run_until(SimTime t_end) {
    if (!handler_) throw std::logic_error("run_until: no handler registered");
    std::uint64_t dispatched = 0;
    while (!queue_.empty() && queue_.top().time <= t_end) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      if (trace_) write_trace(ev);
      handler_(ev);
      ++dispatched;
    }
    now_ = t_end;
    return dispatched;
  }

  std::size_t pending() const { return queue_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  void write_trace(const Event& ev) {
    *trace_ << ev.time << ' ' << ev.seq << ' ' << to_string(ev.kind());
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, FrameArrivalEv>) {
            *trace_ << " onu=" << p.onu << " size=" << p.size_bytes;
          } else if constexpr (std::is_same_v<T, ReportArrivalAtOltEv>) {
            *trace_ << " onu=" << p.report.onu_id
                    << " queue=" << p.report.queue_bytes;
          } else if constexpr (std::is_same_v<T, GateArrivalAtOnuEv>) {
            *trace_ << " onu=" << p.gate.onu_id << " wl=" << p.gate.wavelength_id
                    << " start=" << p.gate.start_time
                    << " len=" << p.gate.length_bytes;
          } else if constexpr (std::is_same_v<T, TransmissionStartEv> ||
                               std::is_same_v<T, TransmissionEndEv>) {
            *trace_ << " onu=" << p.onu;
          } else if constexpr (std::is_same_v<T, BurstEmissionEv>) {
            *trace_ << " onu=" << p.onu << " period=" << p.period_index;
          }
        },
        ev.payload);
    *trace_ << '\n';
  }

  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  Handler handler_;
  std::ostream* trace_ = nullptr;
};

}  // namespace ponsim
