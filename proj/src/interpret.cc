#include "tsmiss/interpret.h"

#include <sstream>

namespace tsmiss::interpret {

std::vector<grud::StepTrace> collect_traces(const grud::GrudParams& params,
                                            std::span<const FeatureTensor> tensors) {
  std::vector<grud::StepTrace> out;
  out.reserve(tensors.size());
  for (const auto& t : tensors) out.push_back(grud::forward(params, t).trace);
  return out;
}

DecaySummary summarize_decays(std::span<const grud::StepTrace> traces) {
  if (traces.empty()) throw DataError("summarize_decays: no traces");
  DecaySummary s;
  s.n_stays = traces.size();

  // Every stay contributes exactly kNumSlots steps, so per-axis sums
  // normalized once equal the flat means.
  for (const auto& tr : traces) {
    for (std::size_t t = 0; t < kNumSlots; ++t) {
      for (std::size_t d = 0; d < kNumVariables; ++d) {
        const double gx = tr.gamma_x[t][static_cast<Eigen::Index>(d)];
        s.dx_per_feature[d] += gx;
        s.dx_per_timestep[t] += gx;
      }
      for (std::size_t u = 0; u < kHiddenSize; ++u) {
        const double gh = tr.gamma_h[t][static_cast<Eigen::Index>(u)];
        s.dh_per_unit[u] += gh;
        s.dh_per_timestep[t] += gh;
      }
    }
  }
  const double n = static_cast<double>(traces.size());
  for (auto& v : s.dx_per_feature) v /= n * kNumSlots;
  for (auto& v : s.dh_per_unit) v /= n * kNumSlots;
  for (auto& v : s.dx_per_timestep) v /= n * kNumVariables;
  for (auto& v : s.dh_per_timestep) v /= n * kHiddenSize;

  for (double v : s.dx_per_timestep) s.dx_overall += v;
  for (double v : s.dh_per_timestep) s.dh_overall += v;
  s.dx_overall /= kNumSlots;
  s.dh_overall /= kNumSlots;
  return s;
}

std::string decay_summary_csv(const DecaySummary& s) {
  std::ostringstream os;
  os << "axis,index,label,value\n";
  for (std::size_t d = 0; d < kNumVariables; ++d) {
    os << "dx_feature," << d << ',' << variable_name(kAllVariables[d]) << ','
       << format_double(s.dx_per_feature[d]) << '\n';
  }
  for (std::size_t u = 0; u < kHiddenSize; ++u) {
    os << "dh_unit," << u << ",unit_" << u << ',' << format_double(s.dh_per_unit[u])
       << '\n';
  }
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    os << "dx_timestep," << t << ",hour_" << t << ','
       << format_double(s.dx_per_timestep[t]) << '\n';
  }
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    os << "dh_timestep," << t << ",hour_" << t << ','
       << format_double(s.dh_per_timestep[t]) << '\n';
  }
  return os.str();
}

}  // namespace tsmiss::interpret
