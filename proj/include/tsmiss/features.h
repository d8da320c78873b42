#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tsmiss/common.h"
#include "tsmiss/ingest.h"

namespace tsmiss {

using StepValues = std::array<double, kNumVariables>;
using SeriesMatrix = std::array<StepValues, kNumSlots>;

// GRU-D input bundle for one stay, in z-transformed units.
//   x:     observed values (0 placeholder where missing)
//   bmi:   1 = missing, 0 = present
//   delta: hours since the last observation strictly before t (0 at t = 0)
//   lov:   last observed value at or before t, train mean (0) if none yet
struct FeatureTensor {
  SeriesMatrix x{};
  SeriesMatrix bmi{};
  SeriesMatrix delta{};
  SeriesMatrix lov{};
  int label = 0;
};

// Six statistics per variable, variables in kAllVariables order.
enum class TabularStat : std::size_t { kMean = 0, kSd, kQ1, kQ2, kQ3, kTsm };
inline constexpr std::size_t kStatsPerVariable = 6;
inline constexpr std::size_t kNumTabularFeatures =
    kNumVariables * kStatsPerVariable;

using TabularFeatures = std::array<double, kNumTabularFeatures>;

struct TabularRow {
  TabularFeatures features{};
  int label = 0;
};

inline constexpr std::size_t tabular_index(Variable v, TabularStat s) {
  return index_of(v) * kStatsPerVariable + static_cast<std::size_t>(s);
}

// Names such as "hr_mean", "bp_dia_tsm" in the fixed feature order.
std::string tabular_feature_name(std::size_t index);

struct TrainStats {
  StepValues mean{};
  StepValues sd{};  // degenerate spreads replaced by 1
  TabularFeatures tabular_mean{};
  TabularFeatures tabular_sd{};
};

// Fraction of absent slots.
double compute_tsm(const GriddedSeries& series);

// Tabular aggregation over observed slots. `fill_means` supplies mean and
// quartiles for fully missing series (sd is 0 there and for single values).
TabularRow aggregate_tabular(const StayGrids& grids, const StepValues& fill_means,
                             int label = 0);

// Per-variable statistics over all observed slot values of the training
// stays, then tabular statistics over their aggregated rows. Throws
// DataError on an empty split.
TrainStats fit_scaler(std::span<const Stay> train);

double apply_scaler(double value, Variable variable, const TrainStats& stats);

// Raw aggregate row z-transformed with the tabular train statistics.
TabularRow scale_tabular(const TabularRow& raw, const TrainStats& stats);

FeatureTensor build_features(const StayGrids& grids, const TrainStats& stats,
                             int label = 0);

// Convenience wrappers over a set of stays.
std::vector<FeatureTensor> build_feature_set(std::span<const Stay> stays,
                                             const TrainStats& stats);
std::vector<TabularRow> build_tabular_set(std::span<const Stay> stays,
                                          const TrainStats& stats);

}  // namespace tsmiss
