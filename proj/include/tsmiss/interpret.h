#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tsmiss/grud.h"

namespace tsmiss::interpret {

// Mean learned decay rates. Input decay is indexed by input variable; hidden
// decay by hidden unit (the two axes coincide in size only).
struct DecaySummary {
  std::array<double, kNumVariables> dx_per_feature{};
  std::array<double, kHiddenSize> dh_per_unit{};
  std::array<double, kNumSlots> dx_per_timestep{};
  std::array<double, kNumSlots> dh_per_timestep{};
  double dx_overall = 0.0;
  double dh_overall = 0.0;
  std::size_t n_stays = 0;
};

std::vector<grud::StepTrace> collect_traces(const grud::GrudParams& params,
                                            std::span<const FeatureTensor> tensors);

// Throws DataError on empty input.
DecaySummary summarize_decays(std::span<const grud::StepTrace> traces);

// One row per feature, hidden unit and timestep:
//   axis,index,label,value
// with axis in {dx_feature, dh_unit, dx_timestep, dh_timestep}.
std::string decay_summary_csv(const DecaySummary& summary);

}  // namespace tsmiss::interpret
