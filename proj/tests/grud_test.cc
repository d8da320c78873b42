#include <gtest/gtest.h>

#include <cmath>

#include "oracles.h"
#include "tsmiss/grud.h"

namespace tsmiss::grud {
namespace {

Vec vec(double a, double b, double c, double d, double e) {
  Vec v;
  v << a, b, c, d, e;
  return v;
}

TEST(DecayRate, ClosedForms) {
  const Vec delta = vec(0, 1, 2.5, 7, 23);
  EXPECT_EQ(decay_rate(Vec(Vec::Zero()), Vec(Vec::Zero()), delta), Vec::Ones());
  EXPECT_EQ(decay_rate(Vec(Vec::Zero()), Vec(Vec::Constant(-5.0)), delta), Vec::Ones());
  EXPECT_EQ(decay_rate(Mat(Mat::Zero()), Vec(Vec::Zero()), delta), Vec::Ones());

  const Vec g = decay_rate(Vec(Vec::Ones()), Vec(Vec::Zero()), Vec(Vec::Constant(std::log(2.0))));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(g[i], 0.5, 1e-15);
}

TEST(DecayRate, BoundedAndMonotone) {
  oracle::Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    Vec w, b, d1;
    for (int k = 0; k < 5; ++k) {
      w[k] = oracle::uniform(rng, 0.0, 3.0);
      b[k] = oracle::uniform(rng, -3.0, 3.0);
      d1[k] = oracle::uniform(rng, 0.0, 24.0);
    }
    const Vec d2 = d1 + Vec::Constant(oracle::uniform(rng, 0.0, 5.0));
    const Vec g1 = decay_rate(w, b, d1);
    const Vec g2 = decay_rate(w, b, d2);
    for (int k = 0; k < 5; ++k) {
      EXPECT_GT(g1[k], 0.0);
      EXPECT_LE(g1[k], 1.0);
      EXPECT_LE(g2[k], g1[k]);
    }
  }
}

TEST(ImputeInput, Branches) {
  const Vec lov = Vec::Constant(2.0);
  const Vec zero = Vec::Zero();
  const Vec x = Vec::Constant(1.3);
  EXPECT_EQ(impute_input(x, zero, lov, zero, Vec::Constant(0.5)), x);
  EXPECT_EQ(impute_input(zero, Vec::Ones(), lov, zero, Vec::Ones()), lov);
  EXPECT_EQ(impute_input(zero, Vec::Ones(), lov, zero, Vec::Constant(0.5)), Vec::Ones());
  const Vec mixed = impute_input(x, vec(0, 1, 0, 1, 0), lov, zero, Vec::Constant(0.25));
  EXPECT_EQ(mixed, vec(1.3, 0.5, 1.3, 0.5, 1.3));
}

TEST(CellStep, ZeroParams) {
  const GrudParams p;
  oracle::Rng rng(1);
  const Vec any = vec(0.3, -1, 2, 0, 5);
  const Vec bmi = vec(1, 0, 1, 0, 0);
  EXPECT_EQ(cell_step(p, Vec::Zero(), any, bmi, any, any).hidden, Vec::Zero());
  const Vec v = vec(1, -2, 0.5, 4, -0.25);
  EXPECT_EQ(cell_step(p, v, any, bmi, any, any).hidden, 0.5 * v);
}

TEST(CellStep, LargeHiddenDecayAnnihilatesCarry) {
  GrudParams p;
  p.b_gamma_h = Vec::Constant(1000.0);
  const Vec v = vec(1, -2, 0.5, 4, -0.25);
  const auto out = cell_step(p, v, Vec::Zero(), Vec::Zero(), Vec::Zero(), Vec::Ones());
  EXPECT_EQ(out.gamma_h, Vec::Zero());
  EXPECT_EQ(out.hidden, Vec::Zero());
}

TEST(CellStep, NonFiniteNamesStep) {
  GrudParams p;
  p.update.b[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    cell_step(p, Vec::Zero(), Vec::Zero(), Vec::Zero(), Vec::Zero(), Vec::Zero(), 17);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
}

TEST(Forward, ReadoutOnly) {
  oracle::Rng rng(2);
  const auto t = oracle::random_tensor(rng, 0.5, 1);
  EXPECT_EQ(forward(GrudParams{}, t).probability, 0.5);
  GrudParams p;
  p.b_out = 3.0;
  EXPECT_NEAR(forward(p, t).probability, 0.9525741268224334, 1e-15);
}

TEST(Forward, Deterministic) {
  oracle::Rng rng(4);
  const auto p = oracle::random_params(rng, 0.5);
  const auto t = oracle::random_tensor(rng, 0.5, 0);
  const auto a = forward(p, t);
  const auto b = forward(p, t);
  EXPECT_EQ(a.probability, b.probability);
  for (std::size_t s = 0; s < kNumSlots; ++s) EXPECT_EQ(a.trace.hidden[s], b.trace.hidden[s]);
}

TEST(Forward, FullyObservedIgnoresInputDecayAndLov) {
  oracle::Rng rng(6);
  auto t = oracle::random_tensor(rng, 1.0, 1);
  auto p = oracle::random_params(rng, 0.5);
  const double base = forward(p, t).probability;
  for (auto& row : t.lov) row.fill(123.0);
  p.w_gamma_x = Vec::Constant(2.0);
  p.b_gamma_x = Vec::Constant(-0.3);
  EXPECT_EQ(forward(p, t).probability, base);
}

TEST(BceLoss, Values) {
  EXPECT_NEAR(bce_loss(0.5, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss(0.5, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss(0.9, 1), 0.10536051565782628, 1e-15);
  EXPECT_NEAR(bce_loss(1.0, 1), 1e-7, 1e-12);
  EXPECT_NEAR(bce_loss(0.0, 0), 1e-7, 1e-12);
  EXPECT_TRUE(std::isfinite(bce_loss(1.0, 0)));
}

TEST(Backward, ReadoutBiasClosedForm) {
  oracle::Rng rng(8);
  std::vector<FeatureTensor> batch = {oracle::random_tensor(rng, 0.5, 1),
                                      oracle::random_tensor(rng, 0.5, 0)};
  EXPECT_EQ(backward(GrudParams{}, batch).grad.b_out, 0.0);
  const auto single = backward(GrudParams{}, std::span(batch.data(), 1));
  EXPECT_EQ(single.grad.b_out, -0.5);
  EXPECT_NEAR(single.mean_loss, std::log(2.0), 1e-15);
}

TEST(Backward, MatchesFiniteDifferences) {
  oracle::Rng rng(2024);
  for (int i = 0; i < 8; ++i) {
    const auto c = oracle::random_gradient_case(rng);
    const auto analytic = backward(c.params, c.batch).grad.flatten();
    const auto numeric = oracle::numeric_gradient(c.params, c.batch, 1e-5);
    EXPECT_LE(oracle::max_relative_error(analytic, numeric), 1e-4) << "case " << i;
  }
}

TEST(Backward, EmptyBatch) {
  EXPECT_THROW(backward(GrudParams{}, {}), DataError);
}

TEST(Params, FlatLayout) {
  GrudParams p;
  EXPECT_EQ(p.size(), 286u);
  std::vector<double> flat(p.size());
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = static_cast<double>(i);
  p.assign(flat);
  EXPECT_EQ(p.flatten(), flat);
  EXPECT_EQ(p.w_gamma_x[0], 0.0);
  EXPECT_EQ(p.b_out, 285.0);
  EXPECT_THROW(p.assign(std::vector<double>(3)), DataError);
}

TEST(InitParams, RangeAndZeroBiases) {
  const auto p = init_params(42);
  const double bound = 1.0 / std::sqrt(5.0);
  GrudParams::visit(p, [&](const char* name, const double* data, Eigen::Index n, bool bias) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (bias) EXPECT_EQ(data[i], 0.0) << name;
      else EXPECT_LE(std::abs(data[i]), bound) << name;
    }
  });
  EXPECT_EQ(init_params(42).flatten(), p.flatten());
  EXPECT_NE(init_params(43).flatten(), p.flatten());
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamOptimizer adam(2, 0.1, 0.9, 0.999, 1e-8);
  std::vector<double> x = {1.0, -1.0};
  const std::vector<double> g = {3.0, -0.001};
  adam.step(x, g);
  EXPECT_NEAR(x[0], 0.9, 1e-6);
  EXPECT_NEAR(x[1], -0.9, 1e-4);
}

std::vector<FeatureTensor> toy_dataset(std::size_t n, std::uint64_t seed) {
  oracle::Rng rng(seed);
  std::vector<FeatureTensor> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    out.push_back(oracle::random_tensor(rng, label ? 0.8 : 0.3, label));
  }
  return out;
}

TEST(Train, DeterministicAndLearns) {
  const auto data = toy_dataset(100, 3);
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 15;
  const auto a = train(cfg, data);
  const auto b = train(cfg, data);
  EXPECT_EQ(a.params.flatten(), b.params.flatten());
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  ASSERT_EQ(a.epoch_loss.size(), 15u);
  EXPECT_LT(a.epoch_loss.back(), a.initial_loss);
  EXPECT_LT(mean_loss(a.params, data), 0.5);

  cfg.seed = 7;
  EXPECT_NE(train(cfg, data).params.flatten(), a.params.flatten());
}

TEST(Train, KeepsLastPartialBatch) {
  // With a batch larger than the data, one step per epoch sees every example.
  const auto data = toy_dataset(5, 4);
  TrainConfig cfg;
  cfg.batch_size = 3;
  cfg.epochs = 1;
  cfg.learning_rate = 1e-3;
  const auto r = train(cfg, data);
  ASSERT_EQ(r.epoch_loss.size(), 1u);
  EXPECT_TRUE(r.params.all_finite());
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.adam_beta2 = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(train(TrainConfig{}, {}), DataError);
}

}  // namespace
}  // namespace tsmiss::grud
