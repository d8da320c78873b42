#pragma once

#include <span>

namespace tsmiss {

// Small descriptive-statistics helpers shared by featurization and
// evaluation. All take observed values only.

double mean_of(std::span<const double> values);

// Sample standard deviation (n - 1). Returns 0 for fewer than two values.
double sample_sd(std::span<const double> values);

// Quantile by linear interpolation between order statistics at position
// q * (n - 1). Requires a non-empty input and q in [0, 1].
double quantile_linear(std::span<const double> values, double q);

struct Distribution {
  double mean = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

Distribution describe(std::span<const double> values);

}  // namespace tsmiss
