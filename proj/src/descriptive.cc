#include "tsmiss/descriptive.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tsmiss/common.h"

namespace tsmiss {

double mean_of(std::span<const double> values) {
  if (values.empty()) throw DataError("mean of empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double quantile_linear(std::span<const double> values, double q) {
  if (values.empty()) throw DataError("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DataError("quantile level outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Distribution describe(std::span<const double> values) {
  return {mean_of(values), quantile_linear(values, 0.25),
          quantile_linear(values, 0.5), quantile_linear(values, 0.75)};
}

}  // namespace tsmiss
