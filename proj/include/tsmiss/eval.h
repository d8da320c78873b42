#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tsmiss/descriptive.h"
#include "tsmiss/ingest.h"

namespace tsmiss::eval {

struct SplitAssignment {
  std::set<std::string> train;
  std::set<std::string> test;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;

  bool is_train(const std::string& subject_id) const {
    return train.count(subject_id) > 0;
  }
};

// Unique subject ids are sorted, shuffled with the seed, and the first
// floor(fraction * n) go to train. Input order and duplicates do not matter.
SplitAssignment split_by_subject(std::span<const std::string> subjects,
                                 double train_fraction, std::uint64_t seed);

// Partitions stays according to the subject assignment, keeping order.
void partition_stays(std::span<const Stay> stays, const SplitAssignment& split,
                     std::vector<Stay>& train, std::vector<Stay>& test);

// Mann-Whitney AUROC, ties counted one half. Throws DataError unless both
// classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Step-wise average precision over distinct score thresholds, descending.
// Throws DataError without positives.
double auprc(std::span<const double> scores, std::span<const int> labels);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

// (fpr, tpr) from (0, 0) to (1, 1), one point per distinct threshold.
std::vector<CurvePoint> roc_curve(std::span<const double> scores,
                                  std::span<const int> labels);
// (recall, precision), one point per distinct threshold, descending score.
std::vector<CurvePoint> pr_curve(std::span<const double> scores,
                                 std::span<const int> labels);

using Metric = std::function<double(std::span<const double>, std::span<const int>)>;

inline constexpr std::size_t kBootstrapReplicates = 100;
inline constexpr std::size_t kMaxRedraws = 100;

struct BootstrapResult {
  double point = 0.0;  // metric on the full sample
  double mean = 0.0;
  double lower = 0.0;  // 2.5th percentile
  double upper = 0.0;  // 97.5th percentile
  std::vector<double> replicates;
};

// Percentile bootstrap over stays. Replicate i draws from
// derive_seed(seed, kBootstrap, i) and redraws single-class resamples with
// an incremented sub-seed, at most kMaxRedraws times.
BootstrapResult bootstrap_ci(const Metric& metric, std::span<const double> scores,
                             std::span<const int> labels,
                             std::size_t replicates = kBootstrapReplicates,
                             std::uint64_t seed = 42);

// Linear-interpolation percentile, q in [0, 1].
double percentile(std::span<const double> values, double q);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Two-sided Welch t-test. Throws DataError if a sample has fewer than two
// values.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Student t CDF.
double student_t_cdf(double t, double df);

struct GroupStats {
  std::size_t n_subjects = 0;
  std::size_t n_stays = 0;
  std::size_t n_records = 0;
  Distribution age_years;
  Distribution lo_icu_days;
  Distribution lo_seq_hours;
  std::array<Distribution, kNumVariables> tsm_pct;  // percent
};

struct CohortTable {
  GroupStats all;
  GroupStats group0;  // y = 0
  GroupStats group1;  // y = 1
  double p_lo_icu = 1.0;
  double p_lo_seq = 1.0;
  std::array<double, kNumVariables> p_tsm{};
};

// Throws DataError if either label group is empty.
CohortTable cohort_table(std::span<const Stay> stays);

// Table-1 style CSV: characteristic,all,y0,y1,p_value. Distributions are
// rendered as "mean [q1; q2; q3]".
std::string cohort_table_csv(const CohortTable& table);

}  // namespace tsmiss::eval
