#pragma once

#include <cstdio>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ponsim/config.hpp"
#include "ponsim/metrics.hpp"
#include "ponsim/simulation.hpp"

namespace ponsim {

/// One experiment cell: every replication of one (scheme, scenario, b_factor)
/// point, with delay samples pooled across replications.
struct CellResult {
  RunConfig config;
  std::map<OnuId, DelayStore> mfh_pooled;
  DelayStore conventional_pooled;
  std::vector<double> mean_utilization;  // per channel, averaged over reps
  double grant_waste_ratio = 0.0;
  std::uint64_t events_total = 0;
  std::int64_t bytes_generated = 0;
  std::int64_t bytes_delivered = 0;
};

inline CellResult run_cell(const RunConfig& cfg) {
  validate(cfg);
  CellResult out;
  out.config = cfg;
  std::vector<long double> util_sum(static_cast<std::size_t>(cfg.n_channels), 0.0L);
  std::int64_t granted = 0;
  std::int64_t sent = 0;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    Simulation sim(materialize(cfg, static_cast<std::uint64_t>(rep)));
    RunResult r = sim.run();
    for (auto& [id, store] : r.mfh_delays) out.mfh_pooled[id].append(store);
    out.conventional_pooled.append(r.conventional_delays);
    for (std::size_t ch = 0; ch < util_sum.size(); ++ch) {
      util_sum[ch] += r.channel_utilization[ch];
    }
    granted += r.granted_bytes_total;
    sent += r.sent_bytes_total;
    out.events_total += r.events_dispatched;
    out.bytes_generated += r.bytes_generated;
    out.bytes_delivered += r.bytes_delivered;
  }
  out.mean_utilization.reserve(util_sum.size());
  for (auto s : util_sum) {
    out.mean_utilization.push_back(static_cast<double>(s / cfg.replications));
  }
  out.grant_waste_ratio =
      granted > 0 ? static_cast<double>(granted - sent) / static_cast<double>(granted)
                  : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// CSV output. The column set is pinned; downstream notebooks key on it.
// ---------------------------------------------------------------------------

inline const char* csv_header() {
  return "scenario,scheme,b_factor,class,onu_id,samples,min_ps,p1_ps,p25_ps,"
         "p50_ps,p75_ps,p99_ps,p99999_ps,max_ps,mean_ps,util_ch0,util_ch1,"
         "grant_waste_ratio";
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline std::string csv_row(const CellResult& cell, const std::string& cls,
                           std::int64_t onu_id, ClassSummary s) {
  std::string row;
  row += to_string(cell.config.scenario);
  row += ',';
  row += to_string(cell.config.scheme);
  row += ',';
  row += fmt("%g", cell.config.b_factor);
  row += ',';
  row += cls;
  row += ',';
  row += std::to_string(onu_id);
  row += ',';
  row += std::to_string(s.samples);
  row += ',';
  row += std::to_string(s.min_ps);
  row += ',';
  row += std::to_string(s.p1_ps);
  row += ',';
  row += std::to_string(s.p25_ps);
  row += ',';
  row += std::to_string(s.p50_ps);
  row += ',';
  row += std::to_string(s.p75_ps);
  row += ',';
  row += std::to_string(s.p99_ps);
  row += ',';
  row += std::to_string(s.p99_999_ps);
  row += ',';
  row += std::to_string(s.max_ps);
  row += ',';
  row += fmt("%.3f", s.mean_ps);
  row += ',';
  if (!cell.mean_utilization.empty()) row += fmt("%.6f", cell.mean_utilization[0]);
  row += ',';
  if (cell.mean_utilization.size() > 1) row += fmt("%.6f", cell.mean_utilization[1]);
  row += ',';
  row += fmt("%.6f", cell.grant_waste_ratio);
  row += '\n';
  return row;
}

}  // namespace detail

/// Rows for one cell: one per MFH ONU (ascending id), then one pooled
/// conventional row under onu_id -1. No header.
inline std::string cell_csv_rows(CellResult& cell) {
  std::string out;
  for (auto& [id, store] : cell.mfh_pooled) {
    out += detail::csv_row(cell, "mfh", id, summarize_delays(store));
  }
  out += detail::csv_row(cell, "conventional", -1,
                         summarize_delays(cell.conventional_pooled));
  return out;
}

inline std::string cell_csv(CellResult& cell) {
  return std::string(csv_header()) + "\n" + cell_csv_rows(cell);
}

// ---------------------------------------------------------------------------
// Sweeps: the cross product of scenarios x b_factors x schemes over one base
// configuration. A cell that throws is recorded and skipped; the rest of the
// sweep still completes.
// ---------------------------------------------------------------------------

struct SweepSpec {
  RunConfig base;
  std::vector<Scenario> scenarios{Scenario::Peak18h, Scenario::Peak24h};
  std::vector<double> b_factors{0.8, 0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15, 1.2};
  std::vector<SchemeKind> schemes{SchemeKind::FirstFit, SchemeKind::FirstFitPred,
                                  SchemeKind::MosIpact, SchemeKind::MosIpactPred,
                                  SchemeKind::Proposed};
};

struct SweepResult {
  std::string csv;           // header + rows of every successful cell
  nlohmann::json manifest;   // per-cell status, plus the base config
  int cells_ok = 0;
  int cells_failed = 0;
};

inline SweepResult run_sweep(const SweepSpec& spec, std::ostream* progress = nullptr) {
  SweepResult out;
  out.csv = std::string(csv_header()) + "\n";
  out.manifest["base_config"] = to_json(spec.base);
  out.manifest["cells"] = nlohmann::json::array();
  for (Scenario scenario : spec.scenarios) {
    for (double b : spec.b_factors) {
      for (SchemeKind scheme : spec.schemes) {
        RunConfig cfg = spec.base;
        cfg.scenario = scenario;
        cfg.b_factor = b;
        cfg.scheme = scheme;
        nlohmann::json cell{{"scenario", to_string(scenario)},
                            {"b_factor", b},
                            {"scheme", to_string(scheme)}};
        if (progress) {
          *progress << "cell " << to_string(scenario) << " b=" << b << " "
                    << to_string(scheme) << " ... " << std::flush;
        }
        try {
          CellResult result = run_cell(cfg);
          out.csv += cell_csv_rows(result);
          cell["status"] = "ok";
          cell["events"] = result.events_total;
          cell["bytes_delivered"] = result.bytes_delivered;
          ++out.cells_ok;
          if (progress) *progress << "ok\n";
        } catch (const std::exception& e) {
          cell["status"] = "failed";
          cell["error"] = e.what();
          ++out.cells_failed;
          if (progress) *progress << "FAILED: " << e.what() << "\n";
        }
        out.manifest["cells"].push_back(std::move(cell));
      }
    }
  }
  return out;
}

}  // namespace ponsim
