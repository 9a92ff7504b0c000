// Reference schedule for a deterministic two-ONU fixture, shared by the unit
// suite and the acceptance gate.
//
// Two ONUs of one customer on a single wavelength, with scripted bursts:
// ONU0 (1 km, w_max 5000 B) gets 6000 B at 30 us — overloaded;
// ONU1 (2 km, w_max 5000 B) gets 3000 B at 32 us — underloaded.
// The expected tables below were computed by an independent reimplementation
// of the declared polling/first-fit/sizing rules and are compared
// byte-for-byte and picosecond-for-picosecond for every scheme.
#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ponsim/simulation.hpp"

namespace ponsim::fixture {

struct ExpectedGrant {
  SimTime sent;
  OnuId onu;
  SimTime start;
  std::int64_t bytes;
};

struct ExpectedCompletion {
  OnuId onu;
  std::int32_t size;
  SimTime arrival;
  SimTime completion;
};

struct ReferenceTimeline {
  std::vector<ExpectedGrant> grants;        // only those sent <= grant_cutoff
  std::vector<ExpectedCompletion> completions;  // all of them
};

constexpr SimTime kGrantCutoff = micros(120);

inline SimConfig fixture_config(SchemeKind scheme) {
  SimConfig cfg;
  cfg.scheme = SchemeConfig::preset(scheme);
  cfg.onus = {
      {OnuKind::Mfh, 0, 1000, 160'000'000, 0, {{micros(30), 6000}}},
      {OnuKind::Mfh, 0, 2000, 160'000'000, 0, {{micros(32), 3000}}},
  };
  cfg.t_end = micros(250);
  cfg.warmup = 0;
  cfg.n_channels = 1;
  cfg.keep_logs = true;
  return cfg;
}

inline const ReferenceTimeline& reference_timeline(SchemeKind scheme) {
  static const ReferenceTimeline first_fit{
      {
          {0, 0, 5000000, 0},
          {0, 1, 10000000, 0},
          {10020480, 0, 15020480, 0},
          {20020480, 1, 30020480, 0},
          {20040960, 0, 30664960, 0},
          {35685440, 0, 40685440, 5000},
          {40040960, 1, 50040960, 0},
          {47163200, 0, 52163200, 1446},
          {57646400, 0, 62646400, 0},
          {60061440, 1, 70061440, 3000},
          {67666880, 0, 72666880, 0},
          {77687360, 0, 82687360, 0},
          {81041920, 1, 91041920, 0},
          {87707840, 0, 92707840, 0},
          {97728320, 0, 102728320, 0},
          {101062400, 1, 111062400, 0},
          {107748800, 0, 112748800, 0},
          {117769280, 0, 122769280, 0},
      },
      {
          {0, 1518, 30121440, 46171200},
          {0, 1518, 30242880, 46656960},
          {0, 1518, 30364320, 47142720},
          {0, 1446, 30480000, 57625920},
          {1, 1518, 32121440, 80547200},
          {1, 1482, 32240000, 81021440},
      }};

  static const ReferenceTimeline first_fit_pred{
      {
          {0, 0, 5000000, 0},
          {0, 1, 10000000, 0},
          {10020480, 0, 15020480, 0},
          {20020480, 1, 30020480, 0},
          {20040960, 0, 30664960, 5000},
          {37142720, 0, 42142720, 1446},
          {40040960, 1, 50040960, 3000},
          {47625920, 0, 52625920, 0},
          {57646400, 0, 62646400, 0},
          {61021440, 1, 71021440, 0},
          {67666880, 0, 72666880, 0},
          {77687360, 0, 82687360, 0},
          {81041920, 1, 91041920, 0},
          {87707840, 0, 92707840, 0},
          {97728320, 0, 102728320, 0},
          {101062400, 1, 111062400, 0},
          {107748800, 0, 112748800, 0},
          {117769280, 0, 122769280, 0},
      },
      {
          {0, 1518, 30121440, 36150720},
          {0, 1518, 30242880, 36636480},
          {0, 1518, 30364320, 37122240},
          {0, 1446, 30480000, 47605440},
          {1, 1518, 32121440, 60526720},
          {1, 1482, 32240000, 61000960},
      }};

  static const ReferenceTimeline mos_ipact{
      {
          {0, 0, 5000000, 0},
          {0, 1, 10000000, 0},
          {10020480, 0, 15020480, 0},
          {20020480, 1, 30020480, 0},
          {20040960, 0, 30664960, 0},
          {40040960, 1, 50040960, 0},
          {60061440, 1, 70061440, 3000},
          {60061440, 0, 71665920, 6000},
          {78606400, 0, 83606400, 0},
          {81041920, 1, 91041920, 0},
          {88626880, 0, 93626880, 0},
          {101062400, 1, 111062400, 0},
          {101062400, 0, 111706880, 0},
      },
      {
          {1, 1518, 32121440, 80547200},
          {1, 1482, 32240000, 81021440},
          {0, 1518, 30121440, 77151680},
          {0, 1518, 30242880, 77637440},
          {0, 1518, 30364320, 78123200},
          {0, 1446, 30480000, 78585920},
      }};

  static const ReferenceTimeline mos_ipact_pred{
      {
          {0, 0, 5000000, 0},
          {0, 1, 10000000, 0},
          {10020480, 0, 15020480, 0},
          {20020480, 1, 30020480, 0},
          {40040960, 1, 50040960, 3000},
          {40040960, 0, 51645440, 6000},
          {58585920, 0, 63585920, 0},
          {61021440, 1, 71021440, 0},
          {68606400, 0, 73606400, 0},
          {81041920, 1, 91041920, 0},
          {81041920, 0, 91686400, 0},
          {101062400, 1, 111062400, 0},
          {101062400, 0, 111706880, 0},
      },
      {
          {1, 1518, 32121440, 60526720},
          {1, 1482, 32240000, 61000960},
          {0, 1518, 30121440, 57131200},
          {0, 1518, 30242880, 57616960},
          {0, 1518, 30364320, 58102720},
          {0, 1446, 30480000, 58565440},
      }};

  static const ReferenceTimeline proposed{
      {
          {0, 0, 5000000, 0},
          {0, 1, 10000000, 0},
          {10020480, 0, 15020480, 0},
          {20020480, 1, 30020480, 0},
          {20040960, 0, 30664960, 6000},
          {37605440, 0, 42605440, 0},
          {40040960, 1, 50040960, 3000},
          {47625920, 0, 52625920, 0},
          {57646400, 0, 62646400, 0},
          {61021440, 1, 71021440, 0},
          {67666880, 0, 72666880, 0},
          {77687360, 0, 82687360, 0},
          {81041920, 1, 91041920, 0},
          {87707840, 0, 92707840, 0},
          {97728320, 0, 102728320, 0},
          {101062400, 1, 111062400, 0},
          {107748800, 0, 112748800, 0},
          {117769280, 0, 122769280, 0},
      },
      {
          {0, 1518, 30121440, 36150720},
          {0, 1518, 30242880, 36636480},
          {0, 1518, 30364320, 37122240},
          {0, 1446, 30480000, 37584960},
          {1, 1518, 32121440, 60526720},
          {1, 1482, 32240000, 61000960},
      }};

  switch (scheme) {
    case SchemeKind::FirstFit: return first_fit;
    case SchemeKind::FirstFitPred: return first_fit_pred;
    case SchemeKind::MosIpact: return mos_ipact;
    case SchemeKind::MosIpactPred: return mos_ipact_pred;
    case SchemeKind::Proposed: return proposed;
  }
  throw std::logic_error("unknown scheme");
}

/// Framework-free comparison for the acceptance gate: runs the fixture and
/// returns a description of the first mismatch, or nullopt on an exact match.
inline std::optional<std::string> compare_with_reference(SchemeKind scheme) {
  const ReferenceTimeline& ref = reference_timeline(scheme);
  const RunResult result = Simulation(fixture_config(scheme)).run();

  std::vector<GrantRecord> got;
  for (const auto& g : result.grant_log) {
    if (g.sent_time <= kGrantCutoff) got.push_back(g);
  }
  auto fail = [&](const std::string& what) {
    return std::optional<std::string>(to_string(scheme) + ": " + what);
  };
  if (got.size() != ref.grants.size()) {
    return fail("grant count " + std::to_string(got.size()) + " != " +
                std::to_string(ref.grants.size()));
  }
  for (std::size_t i = 0; i < ref.grants.size(); ++i) {
    const auto& e = ref.grants[i];
    const auto& g = got[i];
    if (g.sent_time != e.sent || g.onu != e.onu || g.start_time != e.start ||
        g.grant_bytes != e.bytes || g.wavelength_id != 0) {
      std::ostringstream os;
      os << "grant row " << i << " got (" << g.sent_time << "," << g.onu << ","
         << g.start_time << "," << g.grant_bytes << ") want (" << e.sent << ","
         << e.onu << "," << e.start << "," << e.bytes << ")";
      return fail(os.str());
    }
  }
  if (result.completion_log.size() != ref.completions.size()) {
    return fail("completion count " +
                std::to_string(result.completion_log.size()) + " != " +
                std::to_string(ref.completions.size()));
  }
  for (std::size_t i = 0; i < ref.completions.size(); ++i) {
    const auto& e = ref.completions[i];
    const auto& c = result.completion_log[i];
    if (c.onu != e.onu || c.size_bytes != e.size || c.arrival_time != e.arrival ||
        c.completion_time != e.completion) {
      std::ostringstream os;
      os << "completion row " << i << " got (" << c.onu << "," << c.size_bytes
         << "," << c.arrival_time << "," << c.completion_time << ") want ("
         << e.onu << "," << e.size << "," << e.arrival << "," << e.completion
         << ")";
      return fail(os.str());
    }
  }
  return std::nullopt;
}

}  // namespace ponsim::fixture
