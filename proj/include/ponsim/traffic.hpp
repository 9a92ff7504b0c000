#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ponsim/messages.hpp"
#include "ponsim/time.hpp"

namespace ponsim {

// ---------------------------------------------------------------------------
// Seed derivation. Every source owns one named sub-stream so a replication
// is reproducible no matter in which order the sources are consumed.
// ---------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class StreamTag : std::uint64_t { MfhBursts = 1, ConventionalFrames = 2 };

inline std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t replication,
                                 StreamTag tag, std::uint64_t entity) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ replication);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ entity);
  return h;
}

// ---------------------------------------------------------------------------
// Burst serialization: a byte count becomes maximal 1518 B frames plus one
// remainder frame; remainders under 64 B are padded up to the minimum frame.
// ---------------------------------------------------------------------------

inline std::int64_t serialized_burst_bytes(std::int64_t bytes) {
  if (bytes <= 0) return 0;
  const std::int64_t r = bytes % kMaxFrameBytes;
  if (r == 0 || r >= kMinFrameBytes) return bytes;
  return bytes + (kMinFrameBytes - r);
}

inline std::vector<std::int32_t> serialize_burst(std::int64_t bytes) {
  std::vector<std::int32_t> frames;
  if (bytes <= 0) return frames;
  frames.assign(static_cast<std::size_t>(bytes / kMaxFrameBytes),
                static_cast<std::int32_t>(kMaxFrameBytes));
  const std::int64_t r = bytes % kMaxFrameBytes;
  if (r > 0) {
    frames.push_back(static_cast<std::int32_t>(std::max(r, kMinFrameBytes)));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Burst sources. The pre-drawn ledger doubles as the wireless scheduling
// information consumed by the OLT-side traffic predictor, so lookups can
// never disagree with the traffic actually emitted.
// ---------------------------------------------------------------------------

class HorizonExceeded : public std::runtime_error {
 public:
  HorizonExceeded()
      : std::runtime_error("wsi_lookup past the pre-drawn ledger horizon") {}
};

class BurstSource {
 public:
  virtual ~BurstSource() = default;

  virtual bool has_burst(std::uint64_t k) const = 0;
  virtual SimTime emission_time(std::uint64_t k) const = 0;

  /// Serialized byte total of burst k; draws the ledger forward on demand.
  virtual std::int64_t burst_bytes(std::uint64_t k) = 0;

  /// Draw the ledger forward so every burst with emission time <= t is known.
  virtual void extend_to(SimTime t) = 0;

  /// Exact serialized bytes of bursts with emission time in (from, to].
  /// The ledger must already cover `to`; extend_to() first, never guess.
  virtual std::int64_t wsi_bytes(SimTime from, SimTime to) const = 0;
};

/// DU-side burst emitter: every `period` the DU hands the ONU a burst whose
/// byte count is Poisson with mean matching the offered load.
class PoissonBurstSource final : public BurstSource {
 public:
  PoissonBurstSource(std::uint64_t seed, std::int64_t mean_load_bps,
                     SimTime period, SimTime phase = 0)
      : rng_(seed), period_(period), phase_(phase) {
    if (period <= 0) throw std::invalid_argument("burst period must be > 0");
    if (mean_load_bps < 0) throw std::invalid_argument("negative load");
    lambda_bytes_ = static_cast<double>(mean_load_bps) *
                    static_cast<double>(period) / (8.0 * kPsPerSec);
    if (lambda_bytes_ > 0) {
      poisson_ = std::poisson_distribution<std::int64_t>(lambda_bytes_);
    }
  }

  bool has_burst(std::uint64_t) const override { return true; }

  SimTime emission_time(std::uint64_t k) const override {
    return phase_ + static_cast<SimTime>(k) * period_;
  }

  std::int64_t burst_bytes(std::uint64_t k) override {
    ensure_drawn(k);
    return ledger_[k];
  }

  void extend_to(SimTime t) override {
    if (t < phase_) return;
    ensure_drawn(static_cast<std::uint64_t>((t - phase_) / period_));
  }

  std::int64_t wsi_bytes(SimTime from, SimTime to) const override {
    if (to <= from) return 0;
    if (to < phase_) return 0;
    // first k with emission > from, last k with emission <= to
    const std::uint64_t k_first =
        from < phase_ ? 0
                      : static_cast<std::uint64_t>((from - phase_) / period_) + 1;
    const std::uint64_t k_last =
        static_cast<std::uint64_t>((to - phase_) / period_);
    if (k_last >= ledger_.size()) throw HorizonExceeded{};
    std::int64_t sum = 0;
    for (std::uint64_t k = k_first; k <= k_last; ++k) sum += ledger_[k];
    return sum;
  }

  double lambda_bytes() const { return lambda_bytes_; }

 private:
  void ensure_drawn(std::uint64_t k) {
    while (ledger_.size() <= k) {
      const std::int64_t raw = lambda_bytes_ > 0 ? poisson_(rng_) : 0;
      ledger_.push_back(serialized_burst_bytes(raw));
    }
  }

  std::mt19937_64 rng_;
  SimTime period_;
  SimTime phase_;
  double lambda_bytes_ = 0;
  std::poisson_distribution<std::int64_t> poisson_;
  std::vector<std::int64_t> ledger_;
};

/// Fixed burst schedule for deterministic fixtures: explicit
/// (emission time, bytes) pairs, ledger known in full up front.
class ScriptedBurstSource final : public BurstSource {
 public:
  explicit ScriptedBurstSource(std::vector<std::pair<SimTime, std::int64_t>> bursts)
      : bursts_(std::move(bursts)) {
    for (std::size_t i = 1; i < bursts_.size(); ++i) {
      if (bursts_[i].first <= bursts_[i - 1].first) {
        throw std::invalid_argument("scripted bursts must be time-ordered");
      }
    }
    for (auto& [t, b] : bursts_) b = serialized_burst_bytes(b);
  }

  bool has_burst(std::uint64_t k) const override { return k < bursts_.size(); }

  SimTime emission_time(std::uint64_t k) const override {
    return bursts_.at(k).first;
  }

  std::int64_t burst_bytes(std::uint64_t k) override { return bursts_.at(k).second; }

  void extend_to(SimTime) override {}

  std::int64_t wsi_bytes(SimTime from, SimTime to) const override {
    std::int64_t sum = 0;
    for (const auto& [t, b] : bursts_) {
      if (t > from && t <= to) sum += b;
    }
    return sum;
  }

 private:
  std::vector<std::pair<SimTime, std::int64_t>> bursts_;
};

// ---------------------------------------------------------------------------
// Conventional traffic: per-frame Poisson arrivals with a trimodal size mix.
// ---------------------------------------------------------------------------

struct FrameMix {
  std::vector<std::int32_t> sizes{64, 594, 1518};
  std::vector<double> probs{0.47, 0.05, 0.48};

  double mean_size() const {
    double m = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) m += sizes[i] * probs[i];
    return m;
  }
};

class ConventionalSource {
 public:
  ConventionalSource(std::uint64_t seed, std::int64_t mean_load_bps,
                     FrameMix mix = {})
      : rng_(seed), mix_(std::move(mix)), mean_load_bps_(mean_load_bps) {
    if (mean_load_bps < 0) throw std::invalid_argument("negative load");
    if (mix_.sizes.empty() || mix_.sizes.size() != mix_.probs.size()) {
      throw std::invalid_argument("malformed frame mix");
    }
    if (mean_load_bps > 0) {
      const double mean_gap_ps =
          mix_.mean_size() * 8.0 * kPsPerSec / static_cast<double>(mean_load_bps);
      gap_ = std::exponential_distribution<double>(1.0 / mean_gap_ps);
    }
  }

  bool active() const { return mean_load_bps_ > 0; }

  /// Next frame of the stream; arrival times are strictly increasing.
  Frame next() {
    if (!active()) throw std::logic_error("next() on idle source");
    const auto gap = static_cast<SimTime>(std::llround(gap_(rng_)));
    clock_ += std::max<SimTime>(gap, 1);
    return Frame{draw_size(), clock_};
  }

 private:
  std::int32_t draw_size() {
    double u = uniform_(rng_);
    for (std::size_t i = 0; i + 1 < mix_.sizes.size(); ++i) {
      if (u < mix_.probs[i]) return mix_.sizes[i];
      u -= mix_.probs[i];
    }
    return mix_.sizes.back();
  }

  std::mt19937_64 rng_;
  FrameMix mix_;
  std::int64_t mean_load_bps_;
  SimTime clock_ = 0;
  std::exponential_distribution<double> gap_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace ponsim
