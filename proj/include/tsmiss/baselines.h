#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsmiss/features.h"

namespace tsmiss::baselines {

inline constexpr double kDefaultPenaltyC = 0.1;

struct LogRegOptions {
  double penalty_c = kDefaultPenaltyC;
  double tolerance = 1e-6;  // on the change of the scaled objective
  std::size_t max_iterations = 10000;
};

// L1-penalized logistic regression. The objective is
//   sum_i BCE_i + (1 / C) * ||coef||_1
// (intercept unpenalized), minimized in the equivalent per-example scaling
//   mean BCE + ||coef||_1 / (C * n).
struct LogRegModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  double penalty_c = kDefaultPenaltyC;
  std::size_t iterations = 0;
  bool converged = false;
  double objective = 0.0;  // final scaled objective
};

// Throws DataError for empty or single-class input.
LogRegModel fit_logreg(std::span<const std::vector<double>> features,
                       std::span<const int> labels,
                       const LogRegOptions& options = {});
LogRegModel fit_logreg(std::span<const TabularRow> rows,
                       const LogRegOptions& options = {});

// Scaled objective of (coefficients, intercept) on the data; exposed so that
// tests can compare fits.
double logreg_objective(std::span<const std::vector<double>> features,
                        std::span<const int> labels,
                        std::span<const double> coefficients, double intercept,
                        double penalty_c);

double predict_proba(const LogRegModel& model, std::span<const double> features);

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;  // value <= threshold goes left
  double left = 0.0;       // already scaled by shrinkage
  double right = 0.0;
};

struct StumpOptions {
  std::size_t n_estimators = 3000;
  double shrinkage = 0.1;
};

struct StumpEnsemble {
  double base_score = 0.0;  // log-odds of the train prevalence
  double shrinkage = 0.1;
  std::size_t n_features = 0;
  std::vector<Stump> stumps;
  // Set when fitting stopped before n_estimators because no stump reduced
  // the training loss.
  bool stopped_early = false;
  std::vector<double> train_loss;  // mean log-loss after each stage, [0] = base
};

// Best split of a least-squares fit to `residuals`: for each feature, every
// midpoint between consecutive distinct sorted values is a candidate.
// Ties go to the lowest feature index, then the lowest threshold.
struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;  // reduction in residual sum of squares
};

SplitChoice best_stump_split(std::span<const std::vector<double>> features,
                             std::span<const double> residuals);

StumpEnsemble fit_stumps(std::span<const std::vector<double>> features,
                         std::span<const int> labels,
                         const StumpOptions& options = {});
StumpEnsemble fit_stumps(std::span<const TabularRow> rows,
                         const StumpOptions& options = {});

double decision_score(const StumpEnsemble& model, std::span<const double> features);
double predict_proba(const StumpEnsemble& model, std::span<const double> features);

// Row-major view of tabular rows.
std::vector<std::vector<double>> feature_matrix(std::span<const TabularRow> rows);
std::vector<int> label_vector(std::span<const TabularRow> rows);

}  // namespace tsmiss::baselines
