#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tsmiss/common.h"
#include "tsmiss/features.h"

namespace tsmiss::grud {

static_assert(kHiddenSize == kNumVariables,
              "square weight blocks assume hidden size == input size");

using Vec = Eigen::Matrix<double, static_cast<int>(kHiddenSize), 1>;
using Mat = Eigen::Matrix<double, static_cast<int>(kHiddenSize),
                          static_cast<int>(kNumVariables)>;

// One GRU gate: pre-activation W x̂ + U h + V m + b, where m is the missing
// indicator vector (1 = missing).
struct GateParams {
  Mat w = Mat::Zero();
  Mat u = Mat::Zero();
  Mat v = Mat::Zero();
  Vec b = Vec::Zero();
};

// Every trainable weight of the cell. Input decay is diagonal (one weight
// per variable); hidden decay is a full matrix acting on the delta vector.
struct GrudParams {
  Vec w_gamma_x = Vec::Zero();
  Vec b_gamma_x = Vec::Zero();
  Mat w_gamma_h = Mat::Zero();
  Vec b_gamma_h = Vec::Zero();
  GateParams update;
  GateParams reset;
  GateParams candidate;
  Vec w_out = Vec::Zero();
  double b_out = 0.0;

  // Calls fn(name, data, count, is_bias) for every parameter block in a
  // fixed order. The order defines the flat layout used by the optimizer.
  template <typename Self, typename Fn>
  static void visit(Self& self, Fn&& fn) {
    fn("w_gamma_x", self.w_gamma_x.data(), self.w_gamma_x.size(), false);
    fn("b_gamma_x", self.b_gamma_x.data(), self.b_gamma_x.size(), true);
    fn("w_gamma_h", self.w_gamma_h.data(), self.w_gamma_h.size(), false);
    fn("b_gamma_h", self.b_gamma_h.data(), self.b_gamma_h.size(), true);
    visit_gate(self.update, {"w_z", "u_z", "v_z", "b_z"}, fn);
    visit_gate(self.reset, {"w_r", "u_r", "v_r", "b_r"}, fn);
    visit_gate(self.candidate, {"w_c", "u_c", "v_c", "b_c"}, fn);
    fn("w_out", self.w_out.data(), self.w_out.size(), false);
    fn("b_out", &self.b_out, Eigen::Index{1}, true);
  }

  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  bool all_finite() const;

  static GrudParams zeros() { return {}; }

 private:
  template <typename Gate, typename Fn>
  static void visit_gate(Gate& g, const std::array<const char*, 4>& names,
                         Fn& fn) {
    fn(names[0], g.w.data(), g.w.size(), false);
    fn(names[1], g.u.data(), g.u.size(), false);
    fn(names[2], g.v.data(), g.v.size(), false);
    fn(names[3], g.b.data(), g.b.size(), true);
  }
};

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-4;
  std::size_t epochs = 40;
  std::uint64_t seed = 42;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct StepTrace {
  std::array<Vec, kNumSlots> gamma_x;
  std::array<Vec, kNumSlots> gamma_h;
  std::array<Vec, kNumSlots> hidden;
};

inline constexpr double kProbabilityClip = 1e-7;

// exp(-max(0, w ⊙ delta + b)) for a diagonal weight.
Vec decay_rate(const Vec& w_diag, const Vec& b, const Vec& delta);
// exp(-max(0, W delta + b)) for a full weight matrix.
Vec decay_rate(const Mat& w, const Vec& b, const Vec& delta);

// Present entries pass through; missing entries decay from the last
// observed value towards `mean`.
Vec impute_input(const Vec& x, const Vec& bmi, const Vec& lov, const Vec& mean,
                 const Vec& gamma_x);

struct CellOutput {
  Vec hidden;
  Vec gamma_x;
  Vec gamma_h;
};

// One recurrent step. Throws NumericError carrying `step` if any
// intermediate is non-finite.
CellOutput cell_step(const GrudParams& params, const Vec& h_prev, const Vec& x,
                     const Vec& bmi, const Vec& lov, const Vec& delta,
                     std::size_t step = 0);

struct ForwardResult {
  double probability = 0.5;
  StepTrace trace;
};

ForwardResult forward(const GrudParams& params, const FeatureTensor& tensor);

double bce_loss(double probability, int label);

struct Gradient {
  GrudParams grad;
  double mean_loss = 0.0;
};

// Analytic gradient of the mean BCE over `batch` (backprop through time).
Gradient backward(const GrudParams& params, std::span<const FeatureTensor> batch);

// Mean BCE over `data` without gradients.
double mean_loss(const GrudParams& params, std::span<const FeatureTensor> data);

// Weights uniform in [-1/sqrt(5), 1/sqrt(5)], biases zero.
GrudParams init_params(std::uint64_t seed);

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t n_params, double learning_rate, double beta1,
                double beta2, double epsilon);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

struct TrainResult {
  GrudParams params;
  double initial_loss = 0.0;        // mean train loss before the first step
  std::vector<double> epoch_loss;   // example-weighted mean of batch losses
};

// Mini-batch Adam on mean BCE. Deterministic given (config, data).
// Throws NumericError with epoch/batch coordinates on a non-finite loss.
TrainResult train(const TrainConfig& config, std::span<const FeatureTensor> data);

}  // namespace tsmiss::grud
