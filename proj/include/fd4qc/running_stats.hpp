#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "fd4qc/error.hpp"

namespace fd4qc {

/**
 * Single-pass mean / variance / extrema accumulator (Welford's recurrence).
 *
 * After n updates `mean` is the running mean and `m2` the sum of squared
 * deviations from it. `std()` is the sample (n-1) standard deviation and is 0
 * for fewer than two observations. `min`/`max` are 0 until the first update.
 */
struct RunningStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double max = 0.0;
  double min = 0.0;

  void update(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
    if (count == 1) {
      max = min = x;
    } else {
      max = std::max(max, x);
      min = std::min(min, x);
    }
  }

  double variance() const { return count >= 2 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double std() const { return std::sqrt(variance()); }

  bool operator==(const RunningStats&) const = default;
};

inline RunningStats welford_update(RunningStats stats, double x) {
  stats.update(x);
  return stats;
}

/// alpha * x + (1 - alpha) * prev, or x when there is no previous value.
inline double ewma_update(std::optional<double> prev, double x, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(Errc::BadAlpha, "alpha must lie in (0, 1]");
  if (!prev) return x;
  return alpha * x + (1.0 - alpha) * *prev;
}

}  // namespace fd4qc
