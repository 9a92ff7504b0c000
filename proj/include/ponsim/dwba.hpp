#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ponsim/messages.hpp"
#include "ponsim/pon.hpp"
#include "ponsim/time.hpp"
#include "ponsim/traffic.hpp"

namespace ponsim {

class InvalidSla : public std::invalid_argument {
 public:
  explicit InvalidSla(const std::string& what) : std::invalid_argument(what) {}
};

class PrematureRollover : public std::logic_error {
 public:
  PrematureRollover()
      : std::logic_error("cycle rollover before every member was served") {}
};

class PredictionUnavailable : public std::logic_error {
 public:
  PredictionUnavailable()
      : std::logic_error("traffic prediction is only defined for MFH ONUs") {}
};

// ---------------------------------------------------------------------------
// Grant sizing
// ---------------------------------------------------------------------------

/// Per-cycle byte cap a guaranteed bit rate buys: floor(B_k * T_max / 8)
/// with T_max in seconds.
inline std::int64_t compute_w_max(std::int64_t guaranteed_bw_bps, SimTime t_max_ps) {
  if (guaranteed_bw_bps <= 0) throw InvalidSla("guaranteed bandwidth must be > 0");
  if (t_max_ps <= 0) throw InvalidSla("maximum cycle length must be > 0");
  const auto num = static_cast<__int128>(guaranteed_bw_bps) * t_max_ps;
  return static_cast<std::int64_t>(num / (static_cast<__int128>(8) * kPsPerSec));
}

inline std::int64_t size_grant_limited(std::int64_t request_bytes,
                                       std::int64_t w_max_bytes) {
  return std::min(request_bytes, w_max_bytes);
}

inline std::int64_t size_grant_gated(std::int64_t request_bytes) {
  return request_bytes;
}

inline std::int64_t size_grant_fixed(std::int64_t w_max_bytes) {
  return w_max_bytes;
}

struct SlaProfile {
  std::int64_t guaranteed_bw_bps = 0;
  std::int64_t w_max_bytes = 0;
  std::int32_t customer_id = 0;
};

// ---------------------------------------------------------------------------
// Traffic prediction (BS-OLT cooperation)
// ---------------------------------------------------------------------------

/// Request as the OLT will see it by `grant_start_estimate`: the reported
/// backlog plus the bytes the DU is known to emit in (gen_time, start].
/// `epsilon` scales the predicted increment; -1 disables prediction.
inline std::int64_t predict_request(const ReportMsg& report, OnuKind kind,
                                    const BurstSource& wsi,
                                    SimTime grant_start_estimate,
                                    double epsilon = 0.0) {
  if (kind != OnuKind::Mfh) throw PredictionUnavailable{};
  if (grant_start_estimate <= report.gen_time) return report.queue_bytes;
  const std::int64_t upcoming = wsi.wsi_bytes(report.gen_time, grant_start_estimate);
  const auto scaled = static_cast<std::int64_t>(
      std::llround(static_cast<double>(upcoming) * (1.0 + epsilon)));
  return report.queue_bytes + std::max<std::int64_t>(scaled, 0);
}

// ---------------------------------------------------------------------------
// Online excess-bandwidth compensation across a multi-ONU customer
// ---------------------------------------------------------------------------

struct CustomerGroup {
  std::int32_t customer_id = 0;
  std::vector<OnuId> member_onus;      // sorted, unique
  std::int64_t excess_prev = 0;        // slack saved from the previous cycle
  std::int64_t excess_curr = 0;        // slack accumulated in this cycle
  std::vector<OnuId> served_this_cycle;  // sorted, unique
  std::int64_t cycle_index = 0;

  bool cycle_complete() const { return served_this_cycle == member_onus; }

  void mark_served(OnuId onu) {
    auto it = std::lower_bound(served_this_cycle.begin(), served_this_cycle.end(), onu);
    if (it == served_this_cycle.end() || *it != onu) served_this_cycle.insert(it, onu);
  }
};

/// One grant decision of the online sharing scheme. Underloaded members bank
/// their slack into the current-cycle pool; overloaded members top up their
/// cap from the previous cycle's pool first, then the current one.
inline std::int64_t proposed_grant(OnuId onu, std::int64_t request_bytes,
                                   std::int64_t w_max_bytes, CustomerGroup& group) {
  std::int64_t grant = 0;
  if (request_bytes <= w_max_bytes) {
    grant = request_bytes;
    group.excess_curr += w_max_bytes - request_bytes;
  } else {
    const std::int64_t deficit = request_bytes - w_max_bytes;
    const std::int64_t d1 = std::min(deficit, group.excess_prev);
    const std::int64_t d2 = std::min(deficit - d1, group.excess_curr);
    group.excess_prev -= d1;
    group.excess_curr -= d2;
    grant = w_max_bytes + d1 + d2;
  }
  group.mark_served(onu);
  return grant;
}

/// Cycle boundary: keep this cycle's leftover slack for one more cycle,
/// discard what the previous cycle left unused.
inline void cycle_rollover(CustomerGroup& group) {
  if (!group.cycle_complete()) throw PrematureRollover{};
  group.excess_prev = group.excess_curr;
  group.excess_curr = 0;
  group.served_this_cycle.clear();
  group.cycle_index += 1;
}

// ---------------------------------------------------------------------------
// Offline (batch) sharing baseline
// ---------------------------------------------------------------------------

struct MemberRequest {
  OnuId onu = 0;
  std::int64_t request_bytes = 0;
  std::int64_t w_max_bytes = 0;
};

/// Per-cycle batch sharing: the pooled slack of underloaded members is handed
/// to overloaded ones in ascending ONU-id order, each taking at most its
/// deficit. Grants are returned in the order of the input requests.
inline std::vector<std::int64_t> mos_ipact_batch(
    const std::vector<MemberRequest>& requests) {
  std::int64_t pool = 0;
  for (const auto& r : requests) {
    pool += std::max<std::int64_t>(0, r.w_max_bytes - r.request_bytes);
  }

  std::vector<std::size_t> order(requests.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return requests[a].onu < requests[b].onu;
  });

  std::vector<std::int64_t> grants(requests.size(), 0);
  for (std::size_t idx : order) {
    const auto& r = requests[idx];
    if (r.request_bytes <= r.w_max_bytes) {
      grants[idx] = r.request_bytes;
    } else {
      const std::int64_t extra = std::min(r.request_bytes - r.w_max_bytes, pool);
      pool -= extra;
      grants[idx] = r.w_max_bytes + extra;
    }
  }
  return grants;
}

// ---------------------------------------------------------------------------
// First-Fit wavelength and start-time assignment
// ---------------------------------------------------------------------------

struct FirstFitResult {
  std::int32_t wavelength_id = 0;
  SimTime start_time = 0;
};

/// Earliest-available channel, ties broken by the smallest id. The start does
/// not depend on the burst length, so a query made before grant sizing equals
/// the assignment committed after it.
inline FirstFitResult first_fit_query(std::span<const WavelengthChannel> channels,
                                      SimTime earliest_start) {
  if (channels.empty()) throw std::invalid_argument("no upstream channels");
  FirstFitResult best{channels[0].id, std::max(earliest_start, channels[0].horizon)};
  for (const auto& ch : channels.subspan(1)) {
    const SimTime cand = std::max(earliest_start, ch.horizon);
    if (cand < best.start_time) best = {ch.id, cand};
  }
  return best;
}

/// Commit the first-fit choice: advance the winning channel's horizon past
/// the burst (payload + report slot) and the guard gap.
inline FirstFitResult first_fit_assign(std::span<WavelengthChannel> channels,
                                       std::int64_t burst_bytes,
                                       SimTime earliest_start, SimTime guard_ps) {
  if (burst_bytes < 0) throw std::invalid_argument("negative burst size");
  const FirstFitResult pick =
      first_fit_query({channels.data(), channels.size()}, earliest_start);
  for (auto& ch : channels) {
    if (ch.id == pick.wavelength_id) {
      ch.horizon = pick.start_time +
                   tx_time(burst_bytes + kReportSlotBytes, ch.byte_time_ps) +
                   guard_ps;
      break;
    }
  }
  return pick;
}

// ---------------------------------------------------------------------------
// Scheme selection
// ---------------------------------------------------------------------------

enum class SchemeKind { FirstFit, FirstFitPred, MosIpact, MosIpactPred, Proposed };
enum class SharingMode { None, Offline, Online };
enum class SizingPolicy { Fixed, Limited, Gated };

struct SchemeConfig {
  SchemeKind scheme = SchemeKind::FirstFit;
  bool prediction_enabled = false;
  SharingMode sharing_mode = SharingMode::None;
  SizingPolicy sizing = SizingPolicy::Limited;

  static SchemeConfig preset(SchemeKind kind) {
    switch (kind) {
      case SchemeKind::FirstFit:
        return {kind, false, SharingMode::None, SizingPolicy::Limited};
      case SchemeKind::FirstFitPred:
        return {kind, true, SharingMode::None, SizingPolicy::Limited};
      case SchemeKind::MosIpact:
        return {kind, false, SharingMode::Offline, SizingPolicy::Limited};
      case SchemeKind::MosIpactPred:
        return {kind, true, SharingMode::Offline, SizingPolicy::Limited};
      case SchemeKind::Proposed:
        return {kind, true, SharingMode::Online, SizingPolicy::Limited};
    }
    throw std::invalid_argument("unknown scheme");
  }

  void validate() const {
    if (scheme == SchemeKind::Proposed &&
        (!prediction_enabled || sharing_mode != SharingMode::Online ||
         sizing != SizingPolicy::Limited)) {
      throw std::invalid_argument(
          "proposed scheme requires prediction, online sharing, limited sizing");
    }
    if ((scheme == SchemeKind::FirstFit || scheme == SchemeKind::FirstFitPred) &&
        sharing_mode != SharingMode::None) {
      throw std::invalid_argument("first-fit schemes do not share bandwidth");
    }
  }
};

inline std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::FirstFit: return "first-fit";
    case SchemeKind::FirstFitPred: return "first-fit-pred";
    case SchemeKind::MosIpact: return "mos-ipact";
    case SchemeKind::MosIpactPred: return "mos-ipact-pred";
    case SchemeKind::Proposed: return "proposed";
  }
  return "?";
}

inline SchemeKind scheme_from_string(const std::string& name) {
  if (name == "first-fit") return SchemeKind::FirstFit;
  if (name == "first-fit-pred") return SchemeKind::FirstFitPred;
  if (name == "mos-ipact") return SchemeKind::MosIpact;
  if (name == "mos-ipact-pred") return SchemeKind::MosIpactPred;
  if (name == "proposed") return SchemeKind::Proposed;
  throw std::invalid_argument("unknown scheme: " + name);
}

}  // namespace ponsim
