// ponsim: deterministic upstream simulator for a 50G TWDM-EPON carrying
// mobile-fronthaul and conventional traffic under five DWBA schemes.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 run integrity
// failure (an invariant tripped, or a sweep had failing cells).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ponsim/config.hpp"
#include "ponsim/harness.hpp"
#include "ponsim/simulation.hpp"

namespace {

using namespace ponsim;

/// Flags shared by every subcommand: a config file plus targeted overrides.
struct CommonOpts {
  std::string config_path;
  std::string scheme;
  std::string scenario;
  double b_factor = 0.0;
  double duration_s = 0.0;
  double warmup_s = 0.0;
  int replications = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  bool full_scale = false;

  CLI::App* cmd = nullptr;

  void attach(CLI::App* app) {
    cmd = app;
    app->add_option("-c,--config", config_path,
                    "Config file (missing keys keep preset defaults)")
        ->check(CLI::ExistingFile);
    app->add_option("--scheme", scheme,
                    "first-fit | first-fit-pred | mos-ipact | mos-ipact-pred | "
                    "proposed");
    app->add_option("--scenario", scenario, "18h | 24h");
    app->add_option("--b-factor", b_factor,
                    "Guaranteed bandwidth as a multiple of peak load");
    app->add_option("--duration", duration_s, "Simulated seconds per replication");
    app->add_option("--warmup", warmup_s, "Seconds excluded from statistics");
    app->add_option("--reps", replications, "Replications per cell");
    app->add_option("--seed", seed, "Base RNG seed");
    app->add_option("--epsilon", epsilon, "Prediction safety margin");
    app->add_flag("--full-scale", full_scale,
                  "Full-scale evaluation: 60 s x 10 replications");
  }

  RunConfig resolve(bool validate_now = true) const {
    RunConfig cfg =
        config_path.empty() ? RunConfig{} : load_config(config_path);
    if (full_scale) {
      cfg.duration_s = 60.0;
      cfg.replications = 10;
    }
    if (cmd->count("--scheme")) {
      try {
        cfg.scheme = scheme_from_string(scheme);
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
      }
    }
    if (cmd->count("--scenario")) cfg.scenario = scenario_from_string(scenario);
    if (cmd->count("--b-factor")) cfg.b_factor = b_factor;
    if (cmd->count("--duration")) cfg.duration_s = duration_s;
    if (cmd->count("--warmup")) cfg.warmup_s = warmup_s;
    if (cmd->count("--reps")) cfg.replications = replications;
    if (cmd->count("--seed")) cfg.seed = seed;
    if (cmd->count("--epsilon")) cfg.epsilon = epsilon;
    if (validate_now) validate(cfg);
    return cfg;
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << content;
  if (!out) throw ParseError("write failed: " + path);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = ponsim::detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_run(const CommonOpts& opts, const std::string& out_prefix) {
  const RunConfig cfg = opts.resolve();
  std::cerr << "running " << to_string(cfg.scenario) << " "
            << to_string(cfg.scheme) << " b=" << cfg.b_factor << ": "
            << cfg.replications << " x " << cfg.duration_s << " s, "
            << cfg.n_onus() << " ONUs\n";
  CellResult cell = run_cell(cfg);
  const std::string csv = cell_csv(cell);

  nlohmann::json sidecar{{"config", to_json(cfg)},
                         {"events", cell.events_total},
                         {"bytes_generated", cell.bytes_generated},
                         {"bytes_delivered", cell.bytes_delivered}};
  if (out_prefix.empty()) {
    std::cout << csv;
  } else {
    write_file(out_prefix + ".csv", csv);
    write_file(out_prefix + ".json", sidecar.dump(2) + "\n");
    std::cerr << "wrote " << out_prefix << ".csv and " << out_prefix << ".json\n";
  }

  for (auto& [id, store] : cell.mfh_pooled) {
    std::cerr << "  mfh onu " << id << ": " << store.size() << " frames, p99.999 "
              << store.percentile(99.999) / 1e6 << " us, max "
              << store.max() / 1e6 << " us\n";
  }
  if (!cell.conventional_pooled.empty()) {
    std::cerr << "  conventional: " << cell.conventional_pooled.size()
              << " frames, p99 " << cell.conventional_pooled.percentile(99) / 1e6
              << " us\n";
  }
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& out_prefix,
              const std::string& scenarios_csv, const std::string& b_factors_csv,
              const std::string& schemes_csv) {
  SweepSpec spec;
  spec.base = opts.resolve();
  if (!scenarios_csv.empty()) {
    spec.scenarios.clear();
    for (const auto& s : split_list(scenarios_csv)) {
      spec.scenarios.push_back(scenario_from_string(s));
    }
  }
  if (!b_factors_csv.empty()) {
    spec.b_factors.clear();
    for (const auto& s : split_list(b_factors_csv)) {
      spec.b_factors.push_back(ponsim::detail::parse_f64("b-factors", s));
    }
  }
  if (!schemes_csv.empty()) {
    spec.schemes.clear();
    for (const auto& s : split_list(schemes_csv)) {
      try {
        spec.schemes.push_back(scheme_from_string(s));
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
      }
    }
  }
  if (spec.scenarios.empty() || spec.b_factors.empty() || spec.schemes.empty()) {
    throw ParseError("sweep lists must be non-empty");
  }

  const std::size_t n_cells =
      spec.scenarios.size() * spec.b_factors.size() * spec.schemes.size();
  std::cerr << "sweep: " << n_cells << " cells, " << spec.base.replications
            << " x " << spec.base.duration_s << " s each\n";
  const SweepResult result = run_sweep(spec, &std::cerr);
  write_file(out_prefix + ".csv", result.csv);
  write_file(out_prefix + ".json", result.manifest.dump(2) + "\n");
  std::cerr << "wrote " << out_prefix << ".csv and " << out_prefix << ".json ("
            << result.cells_ok << " ok, " << result.cells_failed << " failed)\n";
  return result.cells_failed == 0 ? 0 : 2;
}

int cmd_validate(const CommonOpts& opts) {
  const RunConfig cfg = opts.resolve();
  std::cout << to_json(cfg).dump(2) << "\n";
  std::cerr << "config ok: " << cfg.n_onus() << " ONUs ("
            << cfg.n_mfh() << " MFH), conventional guarantee "
            << conventional_guarantee(cfg) << " bps\n";
  return 0;
}

int cmd_trace(const CommonOpts& opts, std::uint64_t replication) {
  RunConfig cfg = opts.resolve(false);
  // Traces grow fast: default to 2 ms, and drop the warm-up cut entirely
  // unless one was asked for.
  if (!opts.cmd->count("--duration") && !opts.full_scale) cfg.duration_s = 0.002;
  if (!opts.cmd->count("--warmup")) cfg.warmup_s = 0.0;
  validate(cfg);
  Simulation sim(materialize(cfg, replication));
  sim.set_trace(&std::cout);
  const RunResult r = sim.run();
  std::cerr << r.events_dispatched << " events, " << r.bytes_delivered
            << " bytes delivered\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Upstream scheduling simulator: 50G TWDM-EPON with mobile-fronthaul "
      "and conventional ONUs under five bandwidth-allocation schemes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ponsim 1.0.0");

  CommonOpts run_opts, sweep_opts, validate_opts, trace_opts;
  std::string run_out, sweep_out = "sweep-out";
  std::string sweep_scenarios, sweep_b_factors, sweep_schemes;
  std::uint64_t trace_rep = 0;

  CLI::App* run = app.add_subcommand(
      "run", "Simulate one cell and emit its per-ONU percentile CSV");
  run_opts.attach(run);
  run->add_option("-o,--out", run_out,
                  "Output prefix (<prefix>.csv + <prefix>.json); default stdout");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Simulate a scenario x b_factor x scheme grid into one CSV");
  sweep_opts.attach(sweep);
  sweep->add_option("-o,--out", sweep_out, "Output prefix for .csv/.json");
  sweep->add_option("--scenarios", sweep_scenarios, "Comma list (default: 18h,24h)");
  sweep->add_option("--b-factors", sweep_b_factors,
                    "Comma list (default: 0.8..1.2 step 0.05)");
  sweep->add_option("--schemes", sweep_schemes, "Comma list (default: all five)");

  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Check a config and print its resolved JSON");
  validate_opts.attach(validate_cmd);

  CLI::App* trace = app.add_subcommand(
      "trace", "Dump the event sequence of one short replication");
  trace_opts.attach(trace);
  trace->add_option("--rep", trace_rep, "Replication index to trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts, run_out);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_opts, sweep_out, sweep_scenarios, sweep_b_factors,
                       sweep_schemes);
    }
    if (validate_cmd->parsed()) return cmd_validate(validate_opts);
    if (trace->parsed()) return cmd_trace(trace_opts, trace_rep);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
