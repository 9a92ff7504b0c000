#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ponsim/dwba.hpp"
#include "ponsim/events.hpp"
#include "ponsim/metrics.hpp"
#include "ponsim/pon.hpp"
#include "ponsim/traffic.hpp"

namespace ponsim {

/// A declared runtime invariant failed mid-run. This is a logic bug in the
/// scheduler, never a data problem; the run must abort.
class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(const std::string& what)
      : std::runtime_error(what) {}
};

struct OnuSpec {
  OnuKind kind = OnuKind::Conventional;
  std::int32_t customer_id = 0;
  std::int64_t distance_m = 0;
  std::int64_t guaranteed_bw_bps = 0;  // B_k, caps each cycle's grant
  std::int64_t offered_load_bps = 0;   // mean generated traffic
  /// Non-empty on an MFH ONU replaces the Poisson emitter (fixtures).
  std::vector<std::pair<SimTime, std::int64_t>> scripted_bursts;
};

struct SimConfig {
  SchemeConfig scheme = SchemeConfig::preset(SchemeKind::FirstFit);
  std::vector<OnuSpec> onus;
  SimTime t_end = seconds(5);
  SimTime warmup = seconds(1);
  SimTime t_max_cycle = micros(250);
  SimTime guard = 624'000;
  SimTime burst_period = micros(250);
  int n_channels = 2;
  std::int64_t channel_rate_bps = 25'000'000'000LL;
  std::int64_t ingress_rate_bps = 100'000'000'000LL;
  double epsilon = 0.0;  // prediction error knob; -1 disables the increment
  std::uint64_t base_seed = 42;
  std::uint64_t replication = 0;
  bool keep_logs = false;  // grant + completion logs for fixture comparison
};

struct GrantRecord {
  SimTime sent_time = 0;
  OnuId onu = -1;
  std::int32_t wavelength_id = -1;
  SimTime start_time = 0;
  std::int64_t grant_bytes = 0;
};

struct CompletionRecord {
  OnuId onu = -1;
  std::int32_t size_bytes = 0;
  SimTime arrival_time = 0;
  SimTime completion_time = 0;
};

struct RunResult {
  std::map<OnuId, DelayStore> mfh_delays;
  DelayStore conventional_delays;
  std::vector<double> channel_utilization;
  double grant_waste_ratio = 0.0;
  std::int64_t granted_bytes_total = 0;
  std::int64_t sent_bytes_total = 0;
  std::uint64_t events_dispatched = 0;
  std::int64_t bytes_generated = 0;
  std::int64_t bytes_delivered = 0;
  std::int64_t bytes_in_flight = 0;
  std::int64_t bytes_queued_at_end = 0;
  std::vector<std::int64_t> generated_by_onu;
  std::vector<GrantRecord> grant_log;
  std::vector<CompletionRecord> completion_log;
};

/// One replication of the upstream: MPCP polling with piggybacked reports,
/// first-fit wavelength assignment, and the configured grant-sizing scheme.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.scheme.validate();
    if (cfg_.onus.empty()) throw std::invalid_argument("no ONUs configured");
    if (cfg_.n_channels <= 0) throw std::invalid_argument("no channels");

    byte_time_ = ps_per_byte(cfg_.channel_rate_bps);
    ingress_byte_time_ = ps_per_byte(cfg_.ingress_rate_bps);

    for (std::size_t i = 0; i < cfg_.onus.size(); ++i) {
      const auto& spec = cfg_.onus[i];
      const auto id = static_cast<OnuId>(i);
      onus_.emplace_back(id, spec.kind, spec.customer_id, spec.distance_m,
                         spec.guaranteed_bw_bps);
      w_max_.push_back(compute_w_max(spec.guaranteed_bw_bps, cfg_.t_max_cycle));
      next_free_.push_back(0);
      windows_.push_back({});
      generated_by_onu_.push_back(0);

      if (spec.kind == OnuKind::Mfh) {
        if (!spec.scripted_bursts.empty()) {
          burst_src_.push_back(
              std::make_unique<ScriptedBurstSource>(spec.scripted_bursts));
        } else {
          burst_src_.push_back(std::make_unique<PoissonBurstSource>(
              stream_seed(cfg_.base_seed, cfg_.replication, StreamTag::MfhBursts,
                          static_cast<std::uint64_t>(i)),
              spec.offered_load_bps, cfg_.burst_period));
        }
        conv_src_.emplace_back();
        mfh_delays_[id];  // every MFH ONU reports a class, even if idle
      } else {
        burst_src_.push_back(nullptr);
        conv_src_.emplace_back(ConventionalSource(
            stream_seed(cfg_.base_seed, cfg_.replication,
                        StreamTag::ConventionalFrames,
                        static_cast<std::uint64_t>(i)),
            spec.offered_load_bps));
      }
    }

    for (std::int32_t c = 0; c < cfg_.n_channels; ++c) {
      channels_.push_back(WavelengthChannel{c, byte_time_, 0});
      busy_.push_back(0);
    }
    checker_.emplace(static_cast<std::size_t>(cfg_.n_channels), cfg_.guard);

    build_groups();
    engine_.set_handler([this](const Event& ev) { dispatch(ev); });
  }

  void set_trace(std::ostream* os) { engine_.set_trace(os); }

  RunResult run() {
    bootstrap();
    engine_.schedule(cfg_.t_end, SimEndEv{});
    const std::uint64_t dispatched = engine_.run_until(cfg_.t_end);
    return finalize(dispatched);
  }

 private:
  // -- per-ONU transmission window state ------------------------------------
  struct Window {
    GateMsg gate;
    SimTime cursor = 0;
    std::int64_t sent_bytes = 0;
    bool open = false;
  };

  // -- online sharing (per multi-ONU customer) -------------------------------
  struct OnlineGroup {
    CustomerGroup group;
    std::int64_t grants_cycle = 0;
    std::int64_t caps_cycle = 0;
    std::int64_t prev_at_start = 0;
  };

  // -- offline sharing: one collected report per member per cycle -----------
  struct OfflineGroup {
    std::vector<OnuId> members;  // ascending
    std::vector<std::optional<std::int64_t>> request;
    std::vector<bool> granted;
    std::deque<ReportMsg> buffered;
    std::int64_t cycle = 0;
    std::size_t collected = 0;

    std::size_t index_of(OnuId onu) const {
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i] == onu) return i;
      }
      throw std::logic_error("ONU not in customer group");
    }
  };

  void build_groups() {
    std::map<std::int32_t, std::vector<OnuId>> by_customer;
    for (const auto& onu : onus_) {
      if (onu.kind() == OnuKind::Mfh) {
        by_customer[onu.customer_id()].push_back(onu.id());
      }
    }
    for (auto& [cust, members] : by_customer) {
      if (cfg_.scheme.sharing_mode == SharingMode::Online) {
        OnlineGroup g;
        g.group.customer_id = cust;
        g.group.member_onus = members;
        online_groups_.emplace(cust, std::move(g));
      } else if (cfg_.scheme.sharing_mode == SharingMode::Offline) {
        OfflineGroup g;
        g.members = members;
        g.request.resize(members.size());
        g.granted.assign(members.size(), false);
        offline_groups_.emplace(cust, std::move(g));
      }
    }
  }

  void bootstrap() {
    // Zero-byte poll of every ONU starts the report/gate loop.
    for (const auto& onu : onus_) send_gate(onu.id(), 0, 0);
    for (const auto& onu : onus_) {
      const auto i = static_cast<std::size_t>(onu.id());
      if (onu.kind() == OnuKind::Mfh) {
        if (burst_src_[i]->has_burst(0)) {
          const SimTime e = burst_src_[i]->emission_time(0);
          if (e <= cfg_.t_end) engine_.schedule(e, BurstEmissionEv{onu.id(), 0});
        }
      } else if (conv_src_[i]->active()) {
        const Frame f = conv_src_[i]->next();
        engine_.schedule(f.arrival_time, FrameArrivalEv{onu.id(), f.size_bytes});
      }
    }
  }

  // -- event dispatch ---------------------------------------------------------

  void dispatch(const Event& ev) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, FrameArrivalEv>) {
            on_frame_arrival(ev.time, p);
          } else if constexpr (std::is_same_v<T, ReportArrivalAtOltEv>) {
            on_report_arrival(ev.time, p.report);
          } else if constexpr (std::is_same_v<T, GateArrivalAtOnuEv>) {
            on_gate_arrival(ev.time, p.gate);
          } else if constexpr (std::is_same_v<T, TransmissionStartEv>) {
            on_tx_start(ev.time, p.onu);
          } else if constexpr (std::is_same_v<T, TransmissionEndEv>) {
            on_tx_end(ev.time, p.onu);
          } else if constexpr (std::is_same_v<T, BurstEmissionEv>) {
            on_burst_emission(ev.time, p);
          }
          // SimEnd: run_until() already stops at t_end.
        },
        ev.payload);
  }

  void on_burst_emission(SimTime t, const BurstEmissionEv& ev) {
    const auto i = static_cast<std::size_t>(ev.onu);
    auto& src = *burst_src_[i];
    const std::int64_t total = src.burst_bytes(ev.period_index);
    // The DU hands the burst over a faster local link, so frames enter the
    // ONU queue staggered by their own serialization time.
    std::int64_t cum = 0;
    for (const std::int32_t size : serialize_burst(total)) {
      cum += size;
      engine_.schedule(t + cum * ingress_byte_time_, FrameArrivalEv{ev.onu, size});
    }
    const std::uint64_t next = ev.period_index + 1;
    if (src.has_burst(next)) {
      const SimTime e = src.emission_time(next);
      if (e <= cfg_.t_end) engine_.schedule(e, BurstEmissionEv{ev.onu, next});
    }
  }

  void on_frame_arrival(SimTime t, const FrameArrivalEv& ev) {
    const auto i = static_cast<std::size_t>(ev.onu);
    onus_[i].enqueue(Frame{ev.size_bytes, t});
    bytes_generated_ += ev.size_bytes;
    generated_by_onu_[i] += ev.size_bytes;
    if (onus_[i].kind() == OnuKind::Conventional) {
      const Frame f = conv_src_[i]->next();
      engine_.schedule(f.arrival_time, FrameArrivalEv{ev.onu, f.size_bytes});
    }
  }

  void on_gate_arrival(SimTime, const GateMsg& gate) {
    const auto i = static_cast<std::size_t>(gate.onu_id);
    onus_[i].pending_grant = gate;
    engine_.schedule(gate.start_time, TransmissionStartEv{gate.onu_id});
  }

  void on_tx_start(SimTime t, OnuId onu) {
    const auto i = static_cast<std::size_t>(onu);
    if (!onus_[i].pending_grant) throw InvariantViolation("transmission without a grant");
    Window& win = windows_[i];
    win.gate = *onus_[i].pending_grant;
    onus_[i].pending_grant.reset();
    win.cursor = t;
    win.sent_bytes = 0;
    win.open = true;
    drain_pass(onu);
  }

  void on_tx_end(SimTime, OnuId onu) { drain_pass(onu); }

  /// One drain attempt inside an open window: ship every queued frame that
  /// still fits the byte budget, else close and report. Frames arriving
  /// while a pass is serializing are picked up by the next pass.
  void drain_pass(OnuId onu) {
    const auto i = static_cast<std::size_t>(onu);
    Window& win = windows_[i];
    const std::int64_t budget = win.gate.length_bytes - win.sent_bytes;
    auto drained = onus_[i].drain(budget, win.cursor, byte_time_);
    if (drained.empty()) {
      close_window(onu);
      return;
    }
    for (const auto& d : drained) {
      win.sent_bytes += d.frame.size_bytes;
      record_delivery(onu, d);
    }
    win.cursor = drained.back().completion_time_at_olt - onus_[i].prop_delay();
    engine_.schedule(win.cursor, TransmissionEndEv{onu});
  }

  void record_delivery(OnuId onu, const DrainedFrame& d) {
    const auto i = static_cast<std::size_t>(onu);
    if (d.completion_time_at_olt > cfg_.t_end) {
      bytes_in_flight_ += d.frame.size_bytes;
      return;
    }
    bytes_delivered_ += d.frame.size_bytes;
    const SimTime delay = d.completion_time_at_olt - d.frame.arrival_time;
    if (d.completion_time_at_olt > cfg_.warmup) {
      if (onus_[i].kind() == OnuKind::Mfh) {
        mfh_delays_[onu].add(delay);
      } else {
        conventional_delays_.add(delay);
      }
    }
    if (cfg_.keep_logs) {
      completion_log_.push_back(CompletionRecord{
          onu, d.frame.size_bytes, d.frame.arrival_time, d.completion_time_at_olt});
    }
  }

  void close_window(OnuId onu) {
    const auto i = static_cast<std::size_t>(onu);
    Window& win = windows_[i];
    win.open = false;

    const SimTime report_end = win.cursor + tx_time(kReportSlotBytes, byte_time_);
    const auto wl = static_cast<std::size_t>(win.gate.wavelength_id);
    checker_->record(win.gate.wavelength_id, win.gate.start_time, report_end);
    busy_[wl] += std::min(report_end, cfg_.t_end) -
                 std::min(win.gate.start_time, cfg_.t_end);
    granted_total_ += win.gate.length_bytes;
    sent_total_ += win.sent_bytes;

    const ReportMsg report = onus_[i].generate_report(win.cursor);
    engine_.schedule(report_end + onus_[i].prop_delay(),
                     ReportArrivalAtOltEv{report});
  }

  // -- OLT side ---------------------------------------------------------------

  SimTime earliest_start(OnuId onu) const {
    const auto i = static_cast<std::size_t>(onu);
    return std::max(engine_.now() + onus_[i].prop_delay(), next_free_[i]);
  }

  std::int64_t effective_request(const ReportMsg& report) {
    const auto i = static_cast<std::size_t>(report.onu_id);
    if (onus_[i].kind() != OnuKind::Mfh || !cfg_.scheme.prediction_enabled) {
      return report.queue_bytes;
    }
    const FirstFitResult tentative =
        first_fit_query(channels_, earliest_start(report.onu_id));
    burst_src_[i]->extend_to(tentative.start_time);
    return predict_request(report, OnuKind::Mfh, *burst_src_[i],
                           tentative.start_time, cfg_.epsilon);
  }

  std::int64_t size_mfh_plain(std::int64_t request, std::int64_t w_max) const {
    switch (cfg_.scheme.sizing) {
      case SizingPolicy::Limited: return size_grant_limited(request, w_max);
      case SizingPolicy::Gated: return size_grant_gated(request);
      case SizingPolicy::Fixed: return size_grant_fixed(w_max);
    }
    return size_grant_limited(request, w_max);
  }

  void on_report_arrival(SimTime t, const ReportMsg& first) {
    std::deque<ReportMsg> todo{first};
    while (!todo.empty()) {
      const ReportMsg report = todo.front();
      todo.pop_front();
      process_report(t, report, todo);
    }
  }

  void process_report(SimTime, const ReportMsg& report, std::deque<ReportMsg>& todo) {
    const auto i = static_cast<std::size_t>(report.onu_id);
    const std::int64_t w_max = w_max_[i];

    if (onus_[i].kind() == OnuKind::Conventional) {
      // Conventional service is plain limited sizing in every scheme.
      send_gate(report.onu_id, size_grant_limited(report.queue_bytes, w_max), 0);
      return;
    }

    switch (cfg_.scheme.sharing_mode) {
      case SharingMode::None: {
        send_gate(report.onu_id, size_mfh_plain(effective_request(report), w_max), 0);
        return;
      }
      case SharingMode::Online: {
        auto& st = online_groups_.at(onus_[i].customer_id());
        const std::int64_t grant =
            proposed_grant(report.onu_id, effective_request(report), w_max, st.group);
        st.grants_cycle += grant;
        st.caps_cycle += w_max;
        send_gate(report.onu_id, grant, st.group.cycle_index);
        if (st.group.excess_prev < 0 || st.group.excess_curr < 0) {
          throw InvariantViolation("negative excess pool");
        }
        if (st.group.cycle_complete()) {
          if (st.grants_cycle > st.caps_cycle + st.prev_at_start) {
            throw InvariantViolation(
                "sharing conservation: cycle grants exceed caps plus carried pool");
          }
          cycle_rollover(st.group);
          st.prev_at_start = st.group.excess_prev;
          st.grants_cycle = 0;
          st.caps_cycle = 0;
        }
        return;
      }
      case SharingMode::Offline: {
        process_offline_report(report, todo);
        return;
      }
    }
  }

  /// Offline sharing: one report per member per cycle. Underloaded members
  /// are granted on the spot; overloaded ones wait for the whole collection.
  /// A member reporting again before the release joins the next cycle.
  void process_offline_report(const ReportMsg& report, std::deque<ReportMsg>& todo) {
    const auto i = static_cast<std::size_t>(report.onu_id);
    auto& st = offline_groups_.at(onus_[i].customer_id());
    const std::size_t idx = st.index_of(report.onu_id);

    if (st.request[idx].has_value()) {
      st.buffered.push_back(report);
      return;
    }

    const std::int64_t request = effective_request(report);
    st.request[idx] = request;
    st.collected += 1;
    if (request <= w_max_[i]) {
      st.granted[idx] = true;
      send_gate(report.onu_id, request, st.cycle);
    }

    if (st.collected < st.members.size()) return;

    // Release: split the cycle's pooled slack among the deferred members.
    std::vector<MemberRequest> reqs;
    reqs.reserve(st.members.size());
    for (std::size_t m = 0; m < st.members.size(); ++m) {
      reqs.push_back(MemberRequest{st.members[m], *st.request[m],
                                   w_max_[static_cast<std::size_t>(st.members[m])]});
    }
    const auto grants = mos_ipact_batch(reqs);
    for (std::size_t m = 0; m < st.members.size(); ++m) {
      if (!st.granted[m]) send_gate(st.members[m], grants[m], st.cycle);
    }

    st.cycle += 1;
    st.collected = 0;
    std::fill(st.granted.begin(), st.granted.end(), false);
    for (auto& r : st.request) r.reset();
    while (!st.buffered.empty()) {
      todo.push_back(st.buffered.front());
      st.buffered.pop_front();
    }
  }

  void send_gate(OnuId onu, std::int64_t grant_bytes, std::int64_t cycle_tag) {
    const auto i = static_cast<std::size_t>(onu);
    const FirstFitResult pick =
        first_fit_assign(channels_, grant_bytes, earliest_start(onu), cfg_.guard);
    next_free_[i] =
        pick.start_time + tx_time(grant_bytes + kReportSlotBytes, byte_time_);
    const GateMsg gate{onu, pick.wavelength_id, pick.start_time, grant_bytes,
                       cycle_tag};
    engine_.schedule(engine_.now() + onus_[i].prop_delay(), GateArrivalAtOnuEv{gate});
    if (cfg_.keep_logs) {
      grant_log_.push_back(GrantRecord{engine_.now(), onu, pick.wavelength_id,
                                       pick.start_time, grant_bytes});
    }
  }

  // -- results ---------------------------------------------------------------

  RunResult finalize(std::uint64_t dispatched) {
    RunResult r;
    r.mfh_delays = std::move(mfh_delays_);
    r.conventional_delays = std::move(conventional_delays_);
    for (std::size_t c = 0; c < busy_.size(); ++c) {
      r.channel_utilization.push_back(static_cast<double>(busy_[c]) /
                                      static_cast<double>(cfg_.t_end));
    }
    r.grant_waste_ratio =
        granted_total_ == 0
            ? 0.0
            : static_cast<double>(granted_total_ - sent_total_) /
                  static_cast<double>(granted_total_);
    r.granted_bytes_total = granted_total_;
    r.sent_bytes_total = sent_total_;
    r.events_dispatched = dispatched;
    r.bytes_generated = bytes_generated_;
    r.bytes_delivered = bytes_delivered_;
    r.bytes_in_flight = bytes_in_flight_;
    for (const auto& onu : onus_) r.bytes_queued_at_end += onu.backlog_bytes();
    r.generated_by_onu = std::move(generated_by_onu_);
    r.grant_log = std::move(grant_log_);
    r.completion_log = std::move(completion_log_);

    if (r.bytes_generated !=
        r.bytes_delivered + r.bytes_in_flight + r.bytes_queued_at_end) {
      throw InvariantViolation("byte conservation failed at run end");
    }
    return r;
  }

  SimConfig cfg_;
  Engine engine_;
  std::int64_t byte_time_ = 320;
  std::int64_t ingress_byte_time_ = 80;

  std::vector<Onu> onus_;
  std::vector<std::int64_t> w_max_;
  std::vector<SimTime> next_free_;
  std::vector<Window> windows_;
  std::vector<std::unique_ptr<BurstSource>> burst_src_;
  std::vector<std::optional<ConventionalSource>> conv_src_;
  std::vector<WavelengthChannel> channels_;
  std::optional<ChannelOccupancyChecker> checker_;
  std::map<std::int32_t, OnlineGroup> online_groups_;
  std::map<std::int32_t, OfflineGroup> offline_groups_;

  std::map<OnuId, DelayStore> mfh_delays_;
  DelayStore conventional_delays_;
  std::vector<SimTime> busy_;
  std::int64_t granted_total_ = 0;
  std::int64_t sent_total_ = 0;
  std::int64_t bytes_generated_ = 0;
  std::int64_t bytes_delivered_ = 0;
  std::int64_t bytes_in_flight_ = 0;
  std::vector<std::int64_t> generated_by_onu_;
  std::vector<GrantRecord> grant_log_;
  std::vector<CompletionRecord> completion_log_;
};

}  // namespace ponsim
