#include <gtest/gtest.h>

#include "oracles.h"
#include "tsmiss/interpret.h"

namespace tsmiss::interpret {
namespace {

grud::StepTrace constant_trace(double g) {
  grud::StepTrace tr;
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    tr.gamma_x[t] = grud::Vec::Constant(g);
    tr.gamma_h[t] = grud::Vec::Constant(g);
    tr.hidden[t] = grud::Vec::Zero();
  }
  return tr;
}

void expect_all(const DecaySummary& s, double v) {
  for (double x : s.dx_per_feature) EXPECT_EQ(x, v);
  for (double x : s.dh_per_unit) EXPECT_EQ(x, v);
  for (double x : s.dx_per_timestep) EXPECT_EQ(x, v);
  for (double x : s.dh_per_timestep) EXPECT_EQ(x, v);
  EXPECT_EQ(s.dx_overall, v);
  EXPECT_EQ(s.dh_overall, v);
}

TEST(SummarizeDecays, ConstantTraces) {
  std::vector<grud::StepTrace> one = {constant_trace(0.5)};
  expect_all(summarize_decays(one), 0.5);

  std::vector<grud::StepTrace> two = {constant_trace(0.75), constant_trace(1.0)};
  const auto s = summarize_decays(two);
  EXPECT_EQ(s.n_stays, 2u);
  expect_all(s, 0.875);
  EXPECT_THROW(summarize_decays({}), DataError);
}

TEST(SummarizeDecays, MatchesFlatAverage) {
  oracle::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto params = oracle::random_params(rng, 1.0);
    std::vector<FeatureTensor> tensors;
    const int n = 1 + static_cast<int>(rng() % 15);
    for (int i = 0; i < n; ++i) tensors.push_back(oracle::random_tensor(rng, 0.5, i % 2));
    const auto traces = collect_traces(params, tensors);
    const auto s = summarize_decays(traces);
    const auto f = oracle::flat_decay_means(traces);
    for (std::size_t d = 0; d < 5; ++d) {
      EXPECT_NEAR(s.dx_per_feature[d], f.dx_feature[d], 1e-12);
      EXPECT_NEAR(s.dh_per_unit[d], f.dh_unit[d], 1e-12);
    }
    for (std::size_t t = 0; t < kNumSlots; ++t) {
      EXPECT_NEAR(s.dx_per_timestep[t], f.dx_timestep[t], 1e-12);
      EXPECT_NEAR(s.dh_per_timestep[t], f.dh_timestep[t], 1e-12);
    }
    EXPECT_NEAR(s.dx_overall, f.dx_overall, 1e-12);
    EXPECT_NEAR(s.dh_overall, f.dh_overall, 1e-12);
    for (double v : s.dx_per_timestep) {
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(CollectTraces, ZeroDecayWeightsGiveOnes) {
  oracle::Rng rng(13);
  auto params = oracle::random_params(rng, 0.5);
  params.w_gamma_x.setZero();
  params.b_gamma_x.setZero();
  params.w_gamma_h.setZero();
  params.b_gamma_h.setZero();
  std::vector<FeatureTensor> tensors = {oracle::random_tensor(rng, 0.3, 0)};
  const auto traces = collect_traces(params, tensors);
  ASSERT_EQ(traces.size(), 1u);
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    EXPECT_EQ(traces[0].gamma_x[t], grud::Vec::Ones());
    EXPECT_EQ(traces[0].gamma_h[t], grud::Vec::Ones());
  }
  expect_all(summarize_decays(traces), 1.0);

  const auto again = collect_traces(params, tensors);
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    EXPECT_EQ(again[0].hidden[t], traces[0].hidden[t]);
  }
}

TEST(DecaySummaryCsv, Shape) {
  std::vector<grud::StepTrace> one = {constant_trace(0.5)};
  const auto csv = decay_summary_csv(summarize_decays(one));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 + 5 + 48);
  EXPECT_EQ(csv.rfind("axis,index,label,value\n", 0), 0u);
  EXPECT_NE(csv.find("dx_feature,4,bp_dia,0.5\n"), std::string::npos);
  EXPECT_NE(csv.find("dh_unit,0,unit_0,0.5\n"), std::string::npos);
  EXPECT_NE(csv.find("dh_timestep,23,hour_23,0.5\n"), std::string::npos);
}

}  // namespace
}  // namespace tsmiss::interpret
