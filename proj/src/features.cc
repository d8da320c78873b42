#include "tsmiss/features.h"

#include "tsmiss/descriptive.h"

namespace tsmiss {

namespace {

constexpr std::array<std::string_view, kStatsPerVariable> kStatNames = {
    "mean", "sd", "q1", "q2", "q3", "tsm"};

std::vector<double> observed_values(const GriddedSeries& series) {
  std::vector<double> out;
  for (const auto& s : series.slots) {
    if (s) out.push_back(*s);
  }
  return out;
}

double scaler_sd(std::span<const double> values) {
  const double sd = sample_sd(values);
  return sd > 0.0 ? sd : 1.0;
}

void check_grids(const StayGrids& grids) {
  for (Variable v : kAllVariables) {
    if (grids[index_of(v)].variable != v) {
      throw DataError("build_features: missing grid for variable " +
                      std::string(variable_name(v)));
    }
  }
}

}  // namespace

std::string tabular_feature_name(std::size_t index) {
  if (index >= kNumTabularFeatures) throw Error("tabular feature index out of range");
  return std::string(variable_name(kAllVariables[index / kStatsPerVariable])) +
         "_" + std::string(kStatNames[index % kStatsPerVariable]);
}

double compute_tsm(const GriddedSeries& series) {
  std::size_t missing = 0;
  for (const auto& s : series.slots) {
    if (!s) ++missing;
  }
  return static_cast<double>(missing) / static_cast<double>(kNumSlots);
}

TabularRow aggregate_tabular(const StayGrids& grids, const StepValues& fill_means,
                             int label) {
  TabularRow row;
  row.label = label;
  for (Variable v : kAllVariables) {
    const auto& series = grids[index_of(v)];
    const auto values = observed_values(series);
    auto at = [&](TabularStat s) -> double& {
      return row.features[tabular_index(v, s)];
    };
    if (values.empty()) {
      const double fill = fill_means[index_of(v)];
      at(TabularStat::kMean) = fill;
      at(TabularStat::kSd) = 0.0;
      at(TabularStat::kQ1) = fill;
      at(TabularStat::kQ2) = fill;
      at(TabularStat::kQ3) = fill;
    } else {
      const auto d = describe(values);
      at(TabularStat::kMean) = d.mean;
      at(TabularStat::kSd) = sample_sd(values);
      at(TabularStat::kQ1) = d.q1;
      at(TabularStat::kQ2) = d.q2;
      at(TabularStat::kQ3) = d.q3;
    }
    at(TabularStat::kTsm) = compute_tsm(series);
  }
  return row;
}

TrainStats fit_scaler(std::span<const Stay> train) {
  if (train.empty()) throw DataError("fit_scaler: empty training split");
  TrainStats stats;
  for (Variable v : kAllVariables) {
    std::vector<double> pooled;
    for (const auto& stay : train) {
      for (const auto& s : stay.grids[index_of(v)].slots) {
        if (s) pooled.push_back(*s);
      }
    }
    const std::size_t d = index_of(v);
    stats.mean[d] = pooled.empty() ? 0.0 : mean_of(pooled);
    stats.sd[d] = scaler_sd(pooled);
  }

  std::array<std::vector<double>, kNumTabularFeatures> columns;
  for (const auto& stay : train) {
    const auto row = aggregate_tabular(stay.grids, stats.mean);
    for (std::size_t k = 0; k < kNumTabularFeatures; ++k) {
      columns[k].push_back(row.features[k]);
    }
  }
  for (std::size_t k = 0; k < kNumTabularFeatures; ++k) {
    stats.tabular_mean[k] = mean_of(columns[k]);
    stats.tabular_sd[k] = scaler_sd(columns[k]);
  }
  return stats;
}

double apply_scaler(double value, Variable variable, const TrainStats& stats) {
  const std::size_t d = index_of(variable);
  return (value - stats.mean[d]) / stats.sd[d];
}

TabularRow scale_tabular(const TabularRow& raw, const TrainStats& stats) {
  TabularRow out;
  out.label = raw.label;
  for (std::size_t k = 0; k < kNumTabularFeatures; ++k) {
    out.features[k] = (raw.features[k] - stats.tabular_mean[k]) / stats.tabular_sd[k];
  }
  return out;
}

FeatureTensor build_features(const StayGrids& grids, const TrainStats& stats,
                             int label) {
  check_grids(grids);
  FeatureTensor out;
  out.label = label;
  for (Variable v : kAllVariables) {
    const std::size_t d = index_of(v);
    const auto& slots = grids[d].slots;
    double last = 0.0;  // train mean in normalized units
    for (std::size_t t = 0; t < kNumSlots; ++t) {
      if (t == 0) {
        out.delta[t][d] = 0.0;
      } else {
        out.delta[t][d] = slots[t - 1] ? 1.0 : 1.0 + out.delta[t - 1][d];
      }
      if (slots[t]) {
        const double z = apply_scaler(*slots[t], v, stats);
        out.x[t][d] = z;
        out.bmi[t][d] = 0.0;
        last = z;
      } else {
        out.x[t][d] = 0.0;
        out.bmi[t][d] = 1.0;
      }
      out.lov[t][d] = last;
    }
  }
  return out;
}

std::vector<FeatureTensor> build_feature_set(std::span<const Stay> stays,
                                             const TrainStats& stats) {
  std::vector<FeatureTensor> out;
  out.reserve(stays.size());
  for (const auto& s : stays) out.push_back(build_features(s.grids, stats, s.meta.label));
  return out;
}

std::vector<TabularRow> build_tabular_set(std::span<const Stay> stays,
                                          const TrainStats& stats) {
  std::vector<TabularRow> out;
  out.reserve(stays.size());
  for (const auto& s : stays) {
    out.push_back(scale_tabular(aggregate_tabular(s.grids, stats.mean, s.meta.label), stats));
  }
  return out;
}

}  // namespace tsmiss
