#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ponsim/time.hpp"

namespace ponsim {

class EmptyStore : public std::runtime_error {
 public:
  EmptyStore() : std::runtime_error("percentile query on empty store") {}
};

class AllZero : public std::runtime_error {
 public:
  AllZero() : std::runtime_error("jain_index of all-zero values") {}
};

/// 1-based nearest-rank index for percentile p, where p is given in
/// milli-percent (99.999% -> 99999). Exact integer arithmetic, no float
/// rounding at rank boundaries.
inline std::size_t nearest_rank(std::int64_t p_milli, std::size_t n) {
  if (n == 0) throw EmptyStore{};
  if (p_milli <= 0 || p_milli > 100'000) {
    throw std::invalid_argument("percentile must lie in (0, 100]");
  }
  const std::int64_t k =
      (p_milli * static_cast<std::int64_t>(n) + 99'999) / 100'000;
  return static_cast<std::size_t>(std::max<std::int64_t>(k, 1));
}

/// Jain fairness index (sum x)^2 / (n * sum x^2); 1.0 for equal shares.
inline double jain_index(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("jain_index of empty set");
  long double s = 0, s2 = 0;
  for (double x : xs) {
    if (x < 0) throw std::invalid_argument("jain_index of negative value");
    s += x;
    s2 += static_cast<long double>(x) * x;
  }
  if (s2 == 0) throw AllZero{};
  return static_cast<double>(s * s / (static_cast<long double>(xs.size()) * s2));
}

/// Append-only store of per-frame delays with exact order statistics.
/// Samples are retained in full; the 99.999th percentile at desk scale
/// needs exact ranks, not sketches.
class DelayStore {
 public:
  void add(SimTime delay_ps) {
    samples_.push_back(delay_ps);
    sorted_ = false;
  }

  void append(const DelayStore& other) {
    samples_.insert(samples_.end(), other.samples_.begin(),
                    other.samples_.end());
    sorted_ = false;
  }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  /// Nearest-rank percentile; p in (0, 100] with 0.001 granularity.
  SimTime percentile(double p) {
    ensure_sorted();
    const auto p_milli = static_cast<std::int64_t>(std::llround(p * 1000.0));
    return samples_[nearest_rank(p_milli, samples_.size()) - 1];
  }

  SimTime min() {
    ensure_sorted();
    if (samples_.empty()) throw EmptyStore{};
    return samples_.front();
  }

  SimTime max() {
    ensure_sorted();
    if (samples_.empty()) throw EmptyStore{};
    return samples_.back();
  }

  double mean() const {
    if (samples_.empty()) throw EmptyStore{};
    long double s = 0;
    for (SimTime v : samples_) s += v;
    return static_cast<double>(s / samples_.size());
  }

  const std::vector<SimTime>& samples() const { return samples_; }

 private:
  void ensure_sorted() {
    if (!sorted_) {
      std::sort(samples_.begin(), samples_.end());
      sorted_ = true;
    }
  }

  std::vector<SimTime> samples_;
  bool sorted_ = true;
};

/// Full percentile panel for one traffic class.
struct ClassSummary {
  std::size_t samples = 0;
  SimTime min_ps = 0;
  SimTime p1_ps = 0;
  SimTime p25_ps = 0;
  SimTime p50_ps = 0;
  SimTime p75_ps = 0;
  SimTime p99_ps = 0;
  SimTime p99_999_ps = 0;
  SimTime max_ps = 0;
  double mean_ps = 0.0;
};

inline ClassSummary summarize_delays(DelayStore& store) {
  ClassSummary s;
  s.samples = store.size();
  if (s.samples == 0) return s;  // absent, not zero-filled
  s.min_ps = store.min();
  s.p1_ps = store.percentile(1);
  s.p25_ps = store.percentile(25);
  s.p50_ps = store.percentile(50);
  s.p75_ps = store.percentile(75);
  s.p99_ps = store.percentile(99);
  s.p99_999_ps = store.percentile(99.999);
  s.max_ps = store.max();
  s.mean_ps = store.mean();
  return s;
}

}  // namespace ponsim
