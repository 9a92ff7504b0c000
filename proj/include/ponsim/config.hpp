#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ponsim/dwba.hpp"
#include "ponsim/simulation.hpp"
#include "ponsim/time.hpp"

namespace ponsim {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

enum class Scenario { Peak18h, Peak24h };

inline std::string to_string(Scenario s) {
  return s == Scenario::Peak18h ? "18h" : "24h";
}

inline Scenario scenario_from_string(const std::string& name) {
  if (name == "18h") return Scenario::Peak18h;
  if (name == "24h") return Scenario::Peak24h;
  throw ParseError("unknown scenario: " + name + " (want 18h or 24h)");
}

/// Resolved experiment description. Defaults reproduce the shipped Dublin
/// preset: 32 ONUs (6 MFH across two customer areas + 26 conventional),
/// two 25G channels, 250 us cycle cap, 0.624 us guard.
struct RunConfig {
  SchemeKind scheme = SchemeKind::Proposed;
  Scenario scenario = Scenario::Peak24h;
  double b_factor = 1.05;       // guaranteed bandwidth as a multiple of peak
  double duration_s = 5.0;
  double warmup_s = 1.0;
  int replications = 3;
  std::uint64_t seed = 42;
  double epsilon = 0.0;

  int n_channels = 2;
  std::int64_t channel_rate_bps = 25'000'000'000LL;
  std::int64_t ingress_rate_bps = 100'000'000'000LL;
  std::int64_t max_cycle_us = 250;
  std::int64_t guard_ps = 624'000;
  std::int64_t burst_period_us = 250;

  std::vector<std::int64_t> residential_peak_bps{4'170'000'000LL, 4'445'000'000LL,
                                                 3'927'000'000LL};
  std::vector<std::int64_t> commercial_peak_bps{4'287'000'000LL, 4'041'000'000LL,
                                                4'440'000'000LL};
  // Routed fiber lengths (geometric map distance x ~1.3 duct routing factor).
  std::vector<std::int64_t> residential_distances_m{5800, 6200, 6600};
  std::vector<std::int64_t> commercial_distances_m{5600, 6000, 6400};
  double offpeak_residential = 0.381;  // residential share of peak at 18h
  double offpeak_commercial = 0.081;   // commercial share of peak at 24h

  int conventional_count = 26;
  double conventional_load_fraction = 0.85;
  std::vector<std::int64_t> conventional_distances_m;  // empty: even spread

  int n_mfh() const {
    return static_cast<int>(residential_peak_bps.size() +
                            commercial_peak_bps.size());
  }
  int n_onus() const { return n_mfh() + conventional_count; }
};

// ---------------------------------------------------------------------------
// Validation and derivation
// ---------------------------------------------------------------------------

inline std::int64_t scaled_bps(double factor, std::int64_t bps) {
  return static_cast<std::int64_t>(std::llround(factor * static_cast<double>(bps)));
}

inline void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError(field + ": " + why);
  };
  if (cfg.b_factor < 0.5 || cfg.b_factor > 2.0) fail("b_factor", "outside [0.5, 2.0]");
  if (cfg.duration_s <= 0) fail("duration_s", "must be > 0");
  if (cfg.warmup_s < 0) fail("warmup_s", "must be >= 0");
  if (cfg.warmup_s >= cfg.duration_s) fail("warmup_s", "must be < duration_s");
  if (cfg.replications < 1) fail("replications", "must be >= 1");
  if (cfg.epsilon < -1.0) fail("epsilon", "must be >= -1");
  if (cfg.n_channels < 1) fail("n_channels", "must be >= 1");
  if (cfg.max_cycle_us <= 0) fail("max_cycle_us", "must be > 0");
  if (cfg.guard_ps < 0) fail("guard_ps", "must be >= 0");
  if (cfg.burst_period_us <= 0) fail("burst_period_us", "must be > 0");
  if (cfg.conventional_count < 0) fail("conventional_count", "must be >= 0");
  if (cfg.conventional_load_fraction < 0 || cfg.conventional_load_fraction > 1) {
    fail("conventional_load_fraction", "outside [0, 1]");
  }
  try {
    ps_per_byte(cfg.channel_rate_bps);
    ps_per_byte(cfg.ingress_rate_bps);
  } catch (const std::invalid_argument& e) {
    fail("channel_rate_bps/ingress_rate_bps", e.what());
  }
  if (cfg.residential_peak_bps.size() != cfg.residential_distances_m.size()) {
    fail("residential_distances_m", "size differs from residential_peak_bps");
  }
  if (cfg.commercial_peak_bps.size() != cfg.commercial_distances_m.size()) {
    fail("commercial_distances_m", "size differs from commercial_peak_bps");
  }
  if (!cfg.conventional_distances_m.empty() &&
      static_cast<int>(cfg.conventional_distances_m.size()) !=
          cfg.conventional_count) {
    fail("conventional_distances_m", "size differs from conventional_count");
  }

  std::int64_t mfh_guaranteed = 0;
  for (auto p : cfg.residential_peak_bps) {
    if (p <= 0) fail("residential_peak_bps", "entries must be > 0");
    if (p >= cfg.ingress_rate_bps) fail("residential_peak_bps", "exceeds ingress rate");
    mfh_guaranteed += scaled_bps(cfg.b_factor, p);
  }
  for (auto p : cfg.commercial_peak_bps) {
    if (p <= 0) fail("commercial_peak_bps", "entries must be > 0");
    if (p >= cfg.ingress_rate_bps) fail("commercial_peak_bps", "exceeds ingress rate");
    mfh_guaranteed += scaled_bps(cfg.b_factor, p);
  }
  const std::int64_t capacity = cfg.n_channels * cfg.channel_rate_bps;
  if (mfh_guaranteed >= capacity) {
    fail("b_factor", "MFH guarantees (" + std::to_string(mfh_guaranteed) +
                         " bps) reach PON capacity (" + std::to_string(capacity) +
                         " bps)");
  }
  for (auto d : cfg.residential_distances_m) {
    if (d <= 0) fail("residential_distances_m", "entries must be > 0");
  }
  for (auto d : cfg.commercial_distances_m) {
    if (d <= 0) fail("commercial_distances_m", "entries must be > 0");
  }
  for (auto d : cfg.conventional_distances_m) {
    if (d <= 0) fail("conventional_distances_m", "entries must be > 0");
  }
}

/// Guaranteed bandwidth of one conventional ONU: the PON capacity left after
/// the MFH guarantees, split evenly.
inline std::int64_t conventional_guarantee(const RunConfig& cfg) {
  if (cfg.conventional_count == 0) return 0;
  std::int64_t mfh = 0;
  for (auto p : cfg.residential_peak_bps) mfh += scaled_bps(cfg.b_factor, p);
  for (auto p : cfg.commercial_peak_bps) mfh += scaled_bps(cfg.b_factor, p);
  return (cfg.n_channels * cfg.channel_rate_bps - mfh) / cfg.conventional_count;
}

/// Expand the experiment description into one replication's simulator input.
/// MFH ONUs come first (residential then commercial), conventional ONUs after.
inline SimConfig materialize(const RunConfig& cfg, std::uint64_t replication) {
  validate(cfg);
  SimConfig sim;
  sim.scheme = SchemeConfig::preset(cfg.scheme);
  sim.t_end = static_cast<SimTime>(std::llround(cfg.duration_s * kPsPerSec));
  sim.warmup = static_cast<SimTime>(std::llround(cfg.warmup_s * kPsPerSec));
  sim.t_max_cycle = cfg.max_cycle_us * kPsPerUs;
  sim.guard = cfg.guard_ps;
  sim.burst_period = cfg.burst_period_us * kPsPerUs;
  sim.n_channels = cfg.n_channels;
  sim.channel_rate_bps = cfg.channel_rate_bps;
  sim.ingress_rate_bps = cfg.ingress_rate_bps;
  sim.epsilon = cfg.epsilon;
  sim.base_seed = cfg.seed;
  sim.replication = replication;

  const double res_mult = cfg.scenario == Scenario::Peak18h ? cfg.offpeak_residential : 1.0;
  const double com_mult = cfg.scenario == Scenario::Peak24h ? cfg.offpeak_commercial : 1.0;

  for (std::size_t i = 0; i < cfg.residential_peak_bps.size(); ++i) {
    const auto peak = cfg.residential_peak_bps[i];
    sim.onus.push_back(OnuSpec{OnuKind::Mfh, 0, cfg.residential_distances_m[i],
                               scaled_bps(cfg.b_factor, peak),
                               scaled_bps(res_mult, peak),
                               {}});
  }
  for (std::size_t i = 0; i < cfg.commercial_peak_bps.size(); ++i) {
    const auto peak = cfg.commercial_peak_bps[i];
    sim.onus.push_back(OnuSpec{OnuKind::Mfh, 1, cfg.commercial_distances_m[i],
                               scaled_bps(cfg.b_factor, peak),
                               scaled_bps(com_mult, peak),
                               {}});
  }

  const std::int64_t conv_bw = conventional_guarantee(cfg);
  for (int i = 0; i < cfg.conventional_count; ++i) {
    std::int64_t dist;
    if (!cfg.conventional_distances_m.empty()) {
      dist = cfg.conventional_distances_m[static_cast<std::size_t>(i)];
    } else if (cfg.conventional_count == 1) {
      dist = 2750;
    } else {
      dist = 500 + (4500 * static_cast<std::int64_t>(i)) / (cfg.conventional_count - 1);
    }
    sim.onus.push_back(OnuSpec{
        OnuKind::Conventional, 100 + i, dist, conv_bw,
        scaled_bps(cfg.conventional_load_fraction, conv_bw), {}});
  }
  return sim;
}

// ---------------------------------------------------------------------------
// Plain-text config: `key = value` lines under [section] headers.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::int64_t parse_i64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::int64_t out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ParseError(key + ": not an integer: '" + v + "'");
  }
}

inline double parse_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ParseError(key + ": not a number: '" + v + "'");
  }
}

inline std::vector<std::int64_t> parse_i64_list(const std::string& key,
                                                const std::string& v) {
  std::vector<std::int64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_i64(key, item));
  }
  return out;
}

}  // namespace detail

/// Parse a config file. Missing keys keep the preset defaults; unknown
/// sections or keys are rejected so typos cannot silently change a run.
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError("line " + std::to_string(lineno) + ": unclosed section");
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "pon" && section != "mfh" &&
          section != "conventional") {
        throw ParseError("line " + std::to_string(lineno) +
                         ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "run.scheme") {
      try {
        cfg.scheme = scheme_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
      }
    } else if (qual == "run.scenario") {
      cfg.scenario = scenario_from_string(value);
    } else if (qual == "run.b_factor") {
      cfg.b_factor = detail::parse_f64(qual, value);
    } else if (qual == "run.duration_s") {
      cfg.duration_s = detail::parse_f64(qual, value);
    } else if (qual == "run.warmup_s") {
      cfg.warmup_s = detail::parse_f64(qual, value);
    } else if (qual == "run.replications") {
      cfg.replications = static_cast<int>(detail::parse_i64(qual, value));
    } else if (qual == "run.seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::parse_i64(qual, value));
    } else if (qual == "run.epsilon") {
      cfg.epsilon = detail::parse_f64(qual, value);
    } else if (qual == "pon.n_channels") {
      cfg.n_channels = static_cast<int>(detail::parse_i64(qual, value));
    } else if (qual == "pon.channel_rate_bps") {
      cfg.channel_rate_bps = detail::parse_i64(qual, value);
    } else if (qual == "pon.ingress_rate_bps") {
      cfg.ingress_rate_bps = detail::parse_i64(qual, value);
    } else if (qual == "pon.max_cycle_us") {
      cfg.max_cycle_us = detail::parse_i64(qual, value);
    } else if (qual == "pon.guard_ps") {
      cfg.guard_ps = detail::parse_i64(qual, value);
    } else if (qual == "pon.burst_period_us") {
      cfg.burst_period_us = detail::parse_i64(qual, value);
    } else if (qual == "mfh.residential_peak_bps") {
      cfg.residential_peak_bps = detail::parse_i64_list(qual, value);
    } else if (qual == "mfh.commercial_peak_bps") {
      cfg.commercial_peak_bps = detail::parse_i64_list(qual, value);
    } else if (qual == "mfh.residential_distances_m") {
      cfg.residential_distances_m = detail::parse_i64_list(qual, value);
    } else if (qual == "mfh.commercial_distances_m") {
      cfg.commercial_distances_m = detail::parse_i64_list(qual, value);
    } else if (qual == "mfh.offpeak_residential") {
      cfg.offpeak_residential = detail::parse_f64(qual, value);
    } else if (qual == "mfh.offpeak_commercial") {
      cfg.offpeak_commercial = detail::parse_f64(qual, value);
    } else if (qual == "conventional.count") {
      cfg.conventional_count = static_cast<int>(detail::parse_i64(qual, value));
    } else if (qual == "conventional.load_fraction") {
      cfg.conventional_load_fraction = detail::parse_f64(qual, value);
    } else if (qual == "conventional.distances_m") {
      cfg.conventional_distances_m = detail::parse_i64_list(qual, value);
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" +
                       qual + "'");
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  RunConfig cfg = parse_config(in);
  validate(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// JSON sidecar: the resolved config, sufficient to reproduce a run bit-exactly.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const RunConfig& cfg) {
  return nlohmann::json{
      {"scheme", to_string(cfg.scheme)},
      {"scenario", to_string(cfg.scenario)},
      {"b_factor", cfg.b_factor},
      {"duration_s", cfg.duration_s},
      {"warmup_s", cfg.warmup_s},
      {"replications", cfg.replications},
      {"seed", cfg.seed},
      {"epsilon", cfg.epsilon},
      {"n_channels", cfg.n_channels},
      {"channel_rate_bps", cfg.channel_rate_bps},
      {"ingress_rate_bps", cfg.ingress_rate_bps},
      {"max_cycle_us", cfg.max_cycle_us},
      {"guard_ps", cfg.guard_ps},
      {"burst_period_us", cfg.burst_period_us},
      {"residential_peak_bps", cfg.residential_peak_bps},
      {"commercial_peak_bps", cfg.commercial_peak_bps},
      {"residential_distances_m", cfg.residential_distances_m},
      {"commercial_distances_m", cfg.commercial_distances_m},
      {"offpeak_residential", cfg.offpeak_residential},
      {"offpeak_commercial", cfg.offpeak_commercial},
      {"conventional_count", cfg.conventional_count},
      {"conventional_load_fraction", cfg.conventional_load_fraction},
      {"conventional_distances_m", cfg.conventional_distances_m},
  };
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  try {
    RunConfig cfg;
    cfg.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    cfg.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    cfg.b_factor = j.at("b_factor").get<double>();
    cfg.duration_s = j.at("duration_s").get<double>();
    cfg.warmup_s = j.at("warmup_s").get<double>();
    cfg.replications = j.at("replications").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.n_channels = j.at("n_channels").get<int>();
    cfg.channel_rate_bps = j.at("channel_rate_bps").get<std::int64_t>();
    cfg.ingress_rate_bps = j.at("ingress_rate_bps").get<std::int64_t>();
    cfg.max_cycle_us = j.at("max_cycle_us").get<std::int64_t>();
    cfg.guard_ps = j.at("guard_ps").get<std::int64_t>();
    cfg.burst_period_us = j.at("burst_period_us").get<std::int64_t>();
    cfg.residential_peak_bps =
        j.at("residential_peak_bps").get<std::vector<std::int64_t>>();
    cfg.commercial_peak_bps =
        j.at("commercial_peak_bps").get<std::vector<std::int64_t>>();
    cfg.residential_distances_m =
        j.at("residential_distances_m").get<std::vector<std::int64_t>>();
    cfg.commercial_distances_m =
        j.at("commercial_distances_m").get<std::vector<std::int64_t>>();
    cfg.offpeak_residential = j.at("offpeak_residential").get<double>();
    cfg.offpeak_commercial = j.at("offpeak_commercial").get<double>();
    cfg.conventional_count = j.at("conventional_count").get<int>();
    cfg.conventional_load_fraction =
        j.at("conventional_load_fraction").get<double>();
    cfg.conventional_distances_m =
        j.at("conventional_distances_m").get<std::vector<std::int64_t>>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config sidecar: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("config sidecar: ") + e.what());
  }
}

}  // namespace ponsim
