#include "tsmiss/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsmiss::baselines {

namespace {

// log(1 + exp(s)) - y * s, stable for large |s|.
double logistic_loss(double score, int label) {
  const double softplus =
      score > 0.0 ? score + std::log1p(std::exp(-score)) : std::log1p(std::exp(score));
  return softplus - static_cast<double>(label) * score;
}

std::size_t check_dataset(std::span<const std::vector<double>> features,
                          std::span<const int> labels, const char* who) {
  if (features.empty()) throw DataError(std::string(who) + ": empty training set");
  if (features.size() != labels.size()) {
    throw DataError(std::string(who) + ": feature/label count mismatch");
  }
  const std::size_t dim = features.front().size();
  bool has0 = false, has1 = false;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim) throw DataError(std::string(who) + ": ragged feature rows");
    if (labels[i] == 0) has0 = true;
    else if (labels[i] == 1) has1 = true;
    else throw DataError(std::string(who) + ": labels must be 0 or 1");
  }
  if (!has0 || !has1) throw DataError(std::string(who) + ": single-class input");
  return dim;
}

double mean_logistic_loss(std::span<const std::vector<double>> x, std::span<const int> y,
                          std::span<const double> w, double b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[i][j];
    sum += logistic_loss(s, y[i]);
  }
  return sum / static_cast<double>(x.size());
}

double l1_norm(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

double logreg_objective(std::span<const std::vector<double>> features,
                        std::span<const int> labels,
                        std::span<const double> coefficients, double intercept,
                        double penalty_c) {
  const double lambda = 1.0 / (penalty_c * static_cast<double>(features.size()));
  return mean_logistic_loss(features, labels, coefficients, intercept) +
         lambda * l1_norm(coefficients);
}

LogRegModel fit_logreg(std::span<const std::vector<double>> x, std::span<const int> y,
                       const LogRegOptions& options) {
  const std::size_t dim = check_dataset(x, y, "fit_logreg");
  if (!(options.penalty_c > 0.0)) throw ConfigError("penalty_c must be positive");
  const std::size_t n = x.size();
  const double lambda = 1.0 / (options.penalty_c * static_cast<double>(n));

  std::vector<double> w(dim, 0.0), w_next(dim), grad_w(dim);
  double b = 0.0;
  double lipschitz = 1.0;
  double smooth = mean_logistic_loss(x, y, w, b);
  double objective = smooth;

  LogRegModel model;
  model.penalty_c = options.penalty_c;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = b;
      for (std::size_t j = 0; j < dim; ++j) s += w[j] * x[i][j];
      const double r = sigmoid(s) - static_cast<double>(y[i]);
      for (std::size_t j = 0; j < dim; ++j) grad_w[j] += r * x[i][j];
      grad_b += r;
    }
    for (double& g : grad_w) g /= static_cast<double>(n);
    grad_b /= static_cast<double>(n);

    // Backtracking on the quadratic upper bound of the smooth part.
    lipschitz = std::max(lipschitz * 0.5, 1e-12);
    double b_next = b;
    double smooth_next = 0.0;
    while (true) {
      const double step = 1.0 / lipschitz;
      for (std::size_t j = 0; j < dim; ++j) {
        w_next[j] = soft_threshold(w[j] - step * grad_w[j], step * lambda);
      }
      b_next = b - step * grad_b;
      smooth_next = mean_logistic_loss(x, y, w_next, b_next);
      double linear = grad_b * (b_next - b);
      double quad = (b_next - b) * (b_next - b);
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = w_next[j] - w[j];
        linear += grad_w[j] * d;
        quad += d * d;
      }
      if (smooth_next <= smooth + linear + 0.5 * lipschitz * quad + 1e-15) break;
      lipschitz *= 2.0;
    }

    const double objective_next = smooth_next + lambda * l1_norm(w_next);
    w.swap(w_next);
    b = b_next;
    smooth = smooth_next;
    const double change = std::abs(objective - objective_next);
    objective = objective_next;
    model.iterations = iter + 1;
    if (change < options.tolerance) {
      model.converged = true;
      break;
    }
  }
  model.coefficients = std::move(w);
  model.intercept = b;
  model.objective = objective;
  return model;
}

LogRegModel fit_logreg(std::span<const TabularRow> rows, const LogRegOptions& options) {
  const auto x = feature_matrix(rows);
  const auto y = label_vector(rows);
  return fit_logreg(x, y, options);
}

double predict_proba(const LogRegModel& model, std::span<const double> features) {
  if (features.size() != model.coefficients.size()) {
    throw DataError("predict_proba: expected " +
                    std::to_string(model.coefficients.size()) + " features, got " +
                    std::to_string(features.size()));
  }
  double s = model.intercept;
  for (std::size_t j = 0; j < features.size(); ++j) s += model.coefficients[j] * features[j];
  return sigmoid(s);
}

namespace {

using FeatureOrders = std::vector<std::vector<std::size_t>>;

constexpr double kTieTolerance = 1e-12;

// Row indices sorted by each feature's value, computed once per fit.
FeatureOrders sort_features(std::span<const std::vector<double>> x) {
  const std::size_t n = x.size();
  const std::size_t dim = n == 0 ? 0 : x.front().size();
  FeatureOrders orders(dim, std::vector<std::size_t>(n));
  for (std::size_t f = 0; f < dim; ++f) {
    auto& order = orders[f];
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
  }
  return orders;
}

SplitChoice best_split_sorted(std::span<const std::vector<double>> x,
                              const FeatureOrders& orders,
                              std::span<const double> residuals) {
  SplitChoice best;
  const std::size_t n = x.size();
  if (n == 0) return best;
  const double total = std::accumulate(residuals.begin(), residuals.end(), 0.0);
  const double base = total * total / static_cast<double>(n);

  for (std::size_t f = 0; f < orders.size(); ++f) {
    const auto& order = orders[f];
    double left_sum = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left_sum += residuals[order[k]];
      const double lo = x[order[k]][f];
      const double hi = x[order[k + 1]][f];
      if (!(lo < hi)) continue;
      const double n_left = static_cast<double>(k + 1);
      const double n_right = static_cast<double>(n - k - 1);
      const double right_sum = total - left_sum;
      const double gain =
          left_sum * left_sum / n_left + right_sum * right_sum / n_right - base;
      // Gains equal up to rounding count as ties and keep the earlier
      // (lower feature, lower threshold) candidate.
      if (gain > best.gain + kTieTolerance * std::max(1.0, std::abs(best.gain))) {
        best = {true, f, 0.5 * (lo + hi), gain};
      }
    }
  }
  return best;
}

}  // namespace

SplitChoice best_stump_split(std::span<const std::vector<double>> x,
                             std::span<const double> residuals) {
  if (x.size() != residuals.size()) {
    throw DataError("best_stump_split: feature/residual count mismatch");
  }
  return best_split_sorted(x, sort_features(x), residuals);
}

StumpEnsemble fit_stumps(std::span<const std::vector<double>> x, std::span<const int> y,
                         const StumpOptions& options) {
  const std::size_t dim = check_dataset(x, y, "fit_stumps");
  if (!(options.shrinkage > 0.0)) throw ConfigError("shrinkage must be positive");
  const std::size_t n = x.size();

  StumpEnsemble model;
  model.shrinkage = options.shrinkage;
  model.n_features = dim;
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  model.base_score = std::log(positives / (static_cast<double>(n) - positives));

  std::vector<double> score(n, model.base_score), residual(n), hessian(n);
  auto loss_of = [&](std::span<const double> s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += logistic_loss(s[i], y[i]);
    return sum / static_cast<double>(n);
  };
  double loss = loss_of(score);
  model.train_loss.push_back(loss);

  const FeatureOrders orders = sort_features(x);
  std::vector<double> candidate(n);
  for (std::size_t stage = 0; stage < options.n_estimators; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      residual[i] = static_cast<double>(y[i]) - p;
      hessian[i] = p * (1.0 - p);
    }
    const SplitChoice split = best_split_sorted(x, orders, residual);
    if (!split.found) {
      model.stopped_early = true;
      break;
    }
    double num_l = 0.0, den_l = 0.0, num_r = 0.0, den_r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i][split.feature] <= split.threshold) {
        num_l += residual[i];
        den_l += hessian[i];
      } else {
        num_r += residual[i];
        den_r += hessian[i];
      }
    }
    constexpr double kMinHessian = 1e-12;
    const Stump stump{split.feature, split.threshold,
                      options.shrinkage * num_l / std::max(den_l, kMinHessian),
                      options.shrinkage * num_r / std::max(den_r, kMinHessian)};
    for (std::size_t i = 0; i < n; ++i) {
      candidate[i] = score[i] + (x[i][stump.feature] <= stump.threshold ? stump.left
                                                                         : stump.right);
    }
    const double next_loss = loss_of(candidate);
    if (!(next_loss < loss)) {
      model.stopped_early = true;
      break;
    }
    score.swap(candidate);
    loss = next_loss;
    model.stumps.push_back(stump);
    model.train_loss.push_back(loss);
  }
  return model;
}

StumpEnsemble fit_stumps(std::span<const TabularRow> rows, const StumpOptions& options) {
  const auto x = feature_matrix(rows);
  const auto y = label_vector(rows);
  return fit_stumps(x, y, options);
}

double decision_score(const StumpEnsemble& model, std::span<const double> features) {
  if (features.size() != model.n_features) {
    throw DataError("predict_proba: expected " + std::to_string(model.n_features) +
                    " features, got " + std::to_string(features.size()));
  }
  double s = model.base_score;
  for (const auto& stump : model.stumps) {
    s += features[stump.feature] <= stump.threshold ? stump.left : stump.right;
  }
  return s;
}

double predict_proba(const StumpEnsemble& model, std::span<const double> features) {
  return sigmoid(decision_score(model, features));
}

std::vector<std::vector<double>> feature_matrix(std::span<const TabularRow> rows) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r.features.begin(), r.features.end());
  return out;
}

std::vector<int> label_vector(std::span<const TabularRow> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.label);
  return out;
}

}  // namespace tsmiss::baselines
