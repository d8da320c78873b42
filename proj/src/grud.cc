#include "tsmiss/grud.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace tsmiss::grud {

namespace {

Vec sigmoid(const Vec& a) {
  return a.unaryExpr([](double v) { return tsmiss::sigmoid(v); });
}

Vec decay_from_preactivation(const Vec& pre) {
  return pre.unaryExpr([](double a) { return std::exp(-std::max(0.0, a)); });
}

// Everything the backward pass needs from one forward step.
struct StepCache {
  Vec x, bmi, lov, delta;
  Vec pre_gx, gamma_x;
  Vec pre_gh, gamma_h;
  Vec h_prev, h_hat, x_hat;
  Vec r, z, c;
  Vec h;
};

Vec row(const SeriesMatrix& m, std::size_t t) {
  return Eigen::Map<const Vec>(m[t].data());
}

// Shared by forward() and backward() so both see bit-identical activations.
void run_step(const GrudParams& p, const Vec& h_prev, StepCache& s,
              std::size_t step) {
  s.h_prev = h_prev;
  s.pre_gx = p.w_gamma_x.cwiseProduct(s.delta) + p.b_gamma_x;
  s.gamma_x = decay_from_preactivation(s.pre_gx);
  s.pre_gh = p.w_gamma_h * s.delta + p.b_gamma_h;
  s.gamma_h = decay_from_preactivation(s.pre_gh);

  s.x_hat = impute_input(s.x, s.bmi, s.lov, Vec::Zero(), s.gamma_x);
  s.h_hat = s.gamma_h.cwiseProduct(h_prev);

  s.r = sigmoid(p.reset.w * s.x_hat + p.reset.u * s.h_hat + p.reset.v * s.bmi +
                p.reset.b);
  s.z = sigmoid(p.update.w * s.x_hat + p.update.u * s.h_hat +
                p.update.v * s.bmi + p.update.b);
  const Vec pre_c = p.candidate.w * s.x_hat +
                    p.candidate.u * s.r.cwiseProduct(s.h_hat) +
                    p.candidate.v * s.bmi + p.candidate.b;
  s.c = pre_c.array().tanh().matrix();
  s.h = (Vec::Ones() - s.z).cwiseProduct(s.h_hat) + s.z.cwiseProduct(s.c);

  if (!s.h.allFinite() || !s.gamma_x.allFinite() || !s.gamma_h.allFinite()) {
    throw NumericError("GRU-D cell: non-finite intermediate at timestep " +
                       std::to_string(step));
  }
}

void load_inputs(const FeatureTensor& t, std::size_t step, StepCache& s) {
  s.x = row(t.x, step);
  s.bmi = row(t.bmi, step);
  s.lov = row(t.lov, step);
  s.delta = row(t.delta, step);
}

double clipped(double p) {
  return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
}

// d(hinge-exp)/d(pre) with the subgradient at the kink taken as 0.
Vec decay_slope(const Vec& pre, const Vec& gamma) {
  Vec out;
  for (Eigen::Index i = 0; i < pre.size(); ++i) {
    out[i] = pre[i] > 0.0 ? -gamma[i] : 0.0;
  }
  return out;
}

void accumulate_gate(GateParams& g, const Vec& d_pre, const Vec& x_hat,
                     const Vec& h_in, const Vec& bmi) {
  g.w.noalias() += d_pre * x_hat.transpose();
  g.u.noalias() += d_pre * h_in.transpose();
  g.v.noalias() += d_pre * bmi.transpose();
  g.b += d_pre;
}

}  // namespace

std::size_t GrudParams::size() const {
  std::size_t n = 0;
  visit(*this, [&](const char*, const double*, Eigen::Index count, bool) {
    n += static_cast<std::size_t>(count);
  });
  return n;
}

std::vector<double> GrudParams::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  visit(*this, [&](const char*, const double* data, Eigen::Index count, bool) {
    out.insert(out.end(), data, data + count);
  });
  return out;
}

void GrudParams::assign(std::span<const double> flat) {
  if (flat.size() != size()) {
    throw DataError("GrudParams::assign: expected " + std::to_string(size()) +
                    " values, got " + std::to_string(flat.size()));
  }
  std::size_t offset = 0;
  visit(*this, [&](const char*, double* data, Eigen::Index count, bool) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), count, data);
    offset += static_cast<std::size_t>(count);
  });
}

bool GrudParams::all_finite() const {
  bool ok = true;
  visit(*this, [&](const char*, const double* data, Eigen::Index count, bool) {
    ok = ok && std::all_of(data, data + count,
                           [](double v) { return std::isfinite(v); });
  });
  return ok;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a positive finite number");
  }
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) {
    throw ConfigError("adam_beta1 must lie in [0, 1)");
  }
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam_beta2 must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
}

Vec decay_rate(const Vec& w_diag, const Vec& b, const Vec& delta) {
  return decay_from_preactivation(w_diag.cwiseProduct(delta) + b);
}

Vec decay_rate(const Mat& w, const Vec& b, const Vec& delta) {
  return decay_from_preactivation(w * delta + b);
}

Vec impute_input(const Vec& x, const Vec& bmi, const Vec& lov, const Vec& mean,
                 const Vec& gamma_x) {
  const Vec presence = Vec::Ones() - bmi;
  const Vec decayed =
      gamma_x.cwiseProduct(lov) + (Vec::Ones() - gamma_x).cwiseProduct(mean);
  return presence.cwiseProduct(x) + bmi.cwiseProduct(decayed);
}

CellOutput cell_step(const GrudParams& params, const Vec& h_prev, const Vec& x,
                     const Vec& bmi, const Vec& lov, const Vec& delta,
                     std::size_t step) {
  StepCache s;
  s.x = x;
  s.bmi = bmi;
  s.lov = lov;
  s.delta = delta;
  run_step(params, h_prev, s, step);
  return {s.h, s.gamma_x, s.gamma_h};
}

ForwardResult forward(const GrudParams& params, const FeatureTensor& tensor) {
  ForwardResult out;
  StepCache s;
  Vec h = Vec::Zero();
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    load_inputs(tensor, t, s);
    run_step(params, h, s, t);
    h = s.h;
    out.trace.gamma_x[t] = s.gamma_x;
    out.trace.gamma_h[t] = s.gamma_h;
    out.trace.hidden[t] = s.h;
  }
  out.probability = tsmiss::sigmoid(params.w_out.dot(h) + params.b_out);
  return out;
}

double bce_loss(double probability, int label) {
  const double p = clipped(probability);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

Gradient backward(const GrudParams& params, std::span<const FeatureTensor> batch) {
  if (batch.empty()) throw DataError("backward: empty batch");
  Gradient out;
  GrudParams& g = out.grad;
  std::array<StepCache, kNumSlots> cache;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss_sum = 0.0;

  for (const auto& example : batch) {
    Vec h = Vec::Zero();
    for (std::size_t t = 0; t < kNumSlots; ++t) {
      load_inputs(example, t, cache[t]);
      run_step(params, h, cache[t], t);
      h = cache[t].h;
    }
    const double p = tsmiss::sigmoid(params.w_out.dot(h) + params.b_out);
    loss_sum += bce_loss(p, example.label);

    // Gradient through the clip is zero once the probability saturates.
    const double pc = clipped(p);
    const double d_logit =
        (pc == p ? p - static_cast<double>(example.label) : 0.0) * scale;
    g.w_out += d_logit * h;
    g.b_out += d_logit;

    Vec dh = d_logit * params.w_out;
    for (std::size_t ti = kNumSlots; ti-- > 0;) {
      const StepCache& s = cache[ti];
      const Vec d_z = dh.cwiseProduct(s.c - s.h_hat);
      const Vec d_c = dh.cwiseProduct(s.z);
      Vec d_h_hat = dh.cwiseProduct(Vec::Ones() - s.z);
      Vec d_x_hat = Vec::Zero();

      const Vec d_pre_c = d_c.cwiseProduct(Vec::Ones() - s.c.cwiseProduct(s.c));
      const Vec rh = s.r.cwiseProduct(s.h_hat);
      accumulate_gate(g.candidate, d_pre_c, s.x_hat, rh, s.bmi);
      d_x_hat.noalias() += params.candidate.w.transpose() * d_pre_c;
      const Vec d_rh = params.candidate.u.transpose() * d_pre_c;
      const Vec d_r = d_rh.cwiseProduct(s.h_hat);
      d_h_hat += d_rh.cwiseProduct(s.r);

      const Vec d_pre_z = d_z.cwiseProduct(s.z.cwiseProduct(Vec::Ones() - s.z));
      accumulate_gate(g.update, d_pre_z, s.x_hat, s.h_hat, s.bmi);
      d_x_hat.noalias() += params.update.w.transpose() * d_pre_z;
      d_h_hat.noalias() += params.update.u.transpose() * d_pre_z;

      const Vec d_pre_r = d_r.cwiseProduct(s.r.cwiseProduct(Vec::Ones() - s.r));
      accumulate_gate(g.reset, d_pre_r, s.x_hat, s.h_hat, s.bmi);
      d_x_hat.noalias() += params.reset.w.transpose() * d_pre_r;
      d_h_hat.noalias() += params.reset.u.transpose() * d_pre_r;

      // Hidden decay: h_hat = gamma_h ⊙ h_prev.
      const Vec d_gamma_h = d_h_hat.cwiseProduct(s.h_prev);
      const Vec d_pre_gh = d_gamma_h.cwiseProduct(decay_slope(s.pre_gh, s.gamma_h));
      g.w_gamma_h.noalias() += d_pre_gh * s.delta.transpose();
      g.b_gamma_h += d_pre_gh;

      // Input decay acts only on missing entries; the imputation mean is 0.
      const Vec d_gamma_x = d_x_hat.cwiseProduct(s.bmi).cwiseProduct(s.lov);
      const Vec d_pre_gx = d_gamma_x.cwiseProduct(decay_slope(s.pre_gx, s.gamma_x));
      g.w_gamma_x += d_pre_gx.cwiseProduct(s.delta);
      g.b_gamma_x += d_pre_gx;

      dh = d_h_hat.cwiseProduct(s.gamma_h);
    }
  }
  out.mean_loss = loss_sum * scale;
  if (!g.all_finite() || !std::isfinite(out.mean_loss)) {
    throw NumericError("backward: non-finite gradient");
  }
  return out;
}

double mean_loss(const GrudParams& params, std::span<const FeatureTensor> data) {
  if (data.empty()) throw DataError("mean_loss: empty data");
  double sum = 0.0;
  for (const auto& t : data) sum += bce_loss(forward(params, t).probability, t.label);
  return sum / static_cast<double>(data.size());
}

GrudParams init_params(std::uint64_t seed) {
  GrudParams p;
  std::mt19937_64 rng(derive_seed(seed, SeedStream::kGrudInit));
  const double bound = 1.0 / std::sqrt(static_cast<double>(kHiddenSize));
  std::uniform_real_distribution<double> dist(-bound, bound);
  GrudParams::visit(p, [&](const char*, double* data, Eigen::Index count, bool is_bias) {
    for (Eigen::Index i = 0; i < count; ++i) data[i] = is_bias ? 0.0 : dist(rng);
  });
  return p;
}

AdamOptimizer::AdamOptimizer(std::size_t n_params, double learning_rate,
                             double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(n_params, 0.0),
      v_(n_params, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error("AdamOptimizer: size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

TrainResult train(const TrainConfig& config, std::span<const FeatureTensor> data) {
  config.validate();
  if (data.empty()) throw DataError("train: empty training set");

  TrainResult out;
  out.params = init_params(config.seed);
  out.initial_loss = mean_loss(out.params, data);

  std::vector<double> flat = out.params.flatten();
  AdamOptimizer adam(flat.size(), config.learning_rate, config.adam_beta1,
                     config.adam_beta2, config.adam_epsilon);
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, SeedStream::kGrudShuffle));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<FeatureTensor> batch;
  batch.reserve(config.batch_size);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double weighted = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(start + config.batch_size, order.size());
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);

      Gradient g;
      try {
        g = backward(out.params, batch);
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      if (!std::isfinite(g.mean_loss)) {
        throw NumericError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      weighted += g.mean_loss * static_cast<double>(batch.size());
      adam.step(flat, g.grad.flatten());
      out.params.assign(flat);
    }
    out.epoch_loss.push_back(weighted / static_cast<double>(data.size()));
  }
  return out;
}

}  // namespace tsmiss::grud
