#include "tsmiss/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "tsmiss/features.h"

namespace tsmiss::eval {

namespace {

struct ClassCounts {
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

ClassCounts count_classes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("metric: score/label count mismatch");
  }
  ClassCounts c;
  for (int y : labels) {
    if (y == 1) ++c.positives;
    else if (y == 0) ++c.negatives;
    else throw DataError("metric: labels must be 0 or 1");
  }
  return c;
}

// Indices sorted by descending score; equal scores are adjacent.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Calls fn(tp, fp) after each group of tied scores, walking from the highest
// score down.
template <typename Fn>
void sweep_thresholds(std::span<const double> scores, std::span<const int> labels,
                      Fn&& fn) {
  const auto order = descending_order(scores);
  std::uint64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] == 1) ++tp;
      else ++fp;
      ++i;
    }
    fn(tp, fp);
  }
}

std::string fmt_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt_p(double p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", p);
  return buf;
}

std::string fmt_dist(const Distribution& d) {
  return fmt_value(d.mean) + " [" + fmt_value(d.q1) + "; " + fmt_value(d.q2) + "; " +
         fmt_value(d.q3) + "]";
}

GroupStats group_stats(const std::vector<const Stay*>& stays) {
  GroupStats g;
  std::set<std::string> subjects;
  std::vector<double> age, lo_icu, lo_seq;
  std::array<std::vector<double>, kNumVariables> tsm;
  for (const Stay* s : stays) {
    subjects.insert(s->meta.subject_id);
    g.n_records += s->n_records;
    age.push_back(s->meta.age_years);
    lo_icu.push_back(s->meta.lo_icu_days);
    lo_seq.push_back(s->lo_seq_hours);
    for (std::size_t d = 0; d < kNumVariables; ++d) {
      tsm[d].push_back(100.0 * compute_tsm(s->grids[d]));
    }
  }
  g.n_subjects = subjects.size();
  g.n_stays = stays.size();
  g.age_years = describe(age);
  g.lo_icu_days = describe(lo_icu);
  g.lo_seq_hours = describe(lo_seq);
  for (std::size_t d = 0; d < kNumVariables; ++d) g.tsm_pct[d] = describe(tsm[d]);
  return g;
}

double sample_variance(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete_beta: continued fraction did not converge");
}

}  // namespace

SplitAssignment split_by_subject(std::span<const std::string> subjects,
                                 double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_frac must lie strictly between 0 and 1");
  }
  std::vector<std::string> unique(subjects.begin(), subjects.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (unique.empty()) throw DataError("split_by_subject: no subjects");

  std::mt19937_64 rng(derive_seed(seed, SeedStream::kSplit));
  std::shuffle(unique.begin(), unique.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(unique.size())));

  SplitAssignment out;
  out.seed = seed;
  out.train_fraction = train_fraction;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    (i < n_train ? out.train : out.test).insert(unique[i]);
  }
  return out;
}

void partition_stays(std::span<const Stay> stays, const SplitAssignment& split,
                     std::vector<Stay>& train, std::vector<Stay>& test) {
  train.clear();
  test.clear();
  for (const auto& s : stays) {
    (split.is_train(s.meta.subject_id) ? train : test).push_back(s);
  }
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = count_classes(scores, labels);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw DataError("auroc: both classes are required");
  }
  // Twice the number of correctly ordered pairs plus tied pairs, counted
  // exactly in integers.
  std::uint64_t twice_wins = 0;
  std::uint64_t negatives_below = counts.negatives;
  sweep_thresholds(scores, labels, [&, tp_prev = std::uint64_t{0},
                                    fp_prev = std::uint64_t{0}](std::uint64_t tp,
                                                                std::uint64_t fp) mutable {
    const std::uint64_t pos = tp - tp_prev;
    const std::uint64_t neg = fp - fp_prev;
    negatives_below -= neg;
    twice_wins += 2 * pos * negatives_below + pos * neg;
    tp_prev = tp;
    fp_prev = fp;
  });
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(counts.positives) * static_cast<double>(counts.negatives));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = count_classes(scores, labels);
  if (counts.positives == 0) throw DataError("auprc: no positive labels");
  // Sum of (new true positives x precision), divided by P once at the end so
  // that a perfect ranking yields exactly 1.
  double weighted = 0.0;
  std::uint64_t tp_prev = 0;
  sweep_thresholds(scores, labels, [&](std::uint64_t tp, std::uint64_t fp) {
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    weighted += static_cast<double>(tp - tp_prev) * precision;
    tp_prev = tp;
  });
  return weighted / static_cast<double>(counts.positives);
}

std::vector<CurvePoint> roc_curve(std::span<const double> scores,
                                  std::span<const int> labels) {
  const auto counts = count_classes(scores, labels);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw DataError("roc_curve: both classes are required");
  }
  std::vector<CurvePoint> out{{0.0, 0.0}};
  sweep_thresholds(scores, labels, [&](std::uint64_t tp, std::uint64_t fp) {
    out.push_back({static_cast<double>(fp) / static_cast<double>(counts.negatives),
                   static_cast<double>(tp) / static_cast<double>(counts.positives)});
  });
  return out;
}

std::vector<CurvePoint> pr_curve(std::span<const double> scores,
                                 std::span<const int> labels) {
  const auto counts = count_classes(scores, labels);
  if (counts.positives == 0) throw DataError("pr_curve: no positive labels");
  std::vector<CurvePoint> out;
  sweep_thresholds(scores, labels, [&](std::uint64_t tp, std::uint64_t fp) {
    out.push_back({static_cast<double>(tp) / static_cast<double>(counts.positives),
                   static_cast<double>(tp) / static_cast<double>(tp + fp)});
  });
  return out;
}

double percentile(std::span<const double> values, double q) {
  return quantile_linear(values, q);
}

BootstrapResult bootstrap_ci(const Metric& metric, std::span<const double> scores,
                             std::span<const int> labels, std::size_t replicates,
                             std::uint64_t seed) {
  if (replicates == 0) throw ConfigError("bootstrap: replicates must be positive");
  BootstrapResult out;
  out.point = metric(scores, labels);
  const std::size_t n = scores.size();

  std::vector<double> rs(n);
  std::vector<int> rl(n);
  out.replicates.reserve(replicates);
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    const std::uint64_t rep_seed = derive_seed(seed, SeedStream::kBootstrap, rep);
    bool drawn = false;
    for (std::size_t attempt = 0; attempt < kMaxRedraws && !drawn; ++attempt) {
      std::mt19937_64 rng(derive_seed(rep_seed, SeedStream::kBootstrap, attempt));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      bool has0 = false, has1 = false;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = pick(rng);
        rs[i] = scores[j];
        rl[i] = labels[j];
        (rl[i] == 1 ? has1 : has0) = true;
      }
      drawn = has0 && has1;
    }
    if (!drawn) {
      throw DataError("bootstrap: replicate " + std::to_string(rep) +
                      " stayed single-class after " + std::to_string(kMaxRedraws) +
                      " redraws");
    }
    out.replicates.push_back(metric(rs, rl));
  }
  out.mean = mean_of(out.replicates);
  out.lower = percentile(out.replicates, 0.025);
  out.upper = percentile(out.replicates, 0.975);
  return out;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DataError("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw DataError("student_t_cdf: df must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DataError("welch_t: each sample needs at least two values");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double diff = mean_of(a) - mean_of(b);
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  const double se2 = va + vb;

  WelchResult r;
  if (se2 == 0.0) {
    // Both samples constant: equal means are indistinguishable, unequal
    // means are perfectly separated.
    r.df = na + nb - 2.0;
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = diff > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = diff / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = incomplete_beta(0.5 * r.df, 0.5, r.df / (r.df + r.t * r.t));
  return r;
}

CohortTable cohort_table(std::span<const Stay> stays) {
  if (stays.empty()) throw DataError("cohort_table: empty cohort");
  std::vector<const Stay*> all, g0, g1;
  for (const auto& s : stays) {
    all.push_back(&s);
    (s.meta.label == 1 ? g1 : g0).push_back(&s);
  }
  if (g0.empty() || g1.empty()) {
    throw DataError("cohort_table: both label groups must be non-empty");
  }

  CohortTable t;
  t.all = group_stats(all);
  t.group0 = group_stats(g0);
  t.group1 = group_stats(g1);

  auto column = [](const std::vector<const Stay*>& group, auto&& get) {
    std::vector<double> v;
    v.reserve(group.size());
    for (const Stay* s : group) v.push_back(get(*s));
    return v;
  };
  auto p_value = [&](auto&& get) {
    return welch_t(column(g0, get), column(g1, get)).p;
  };
  t.p_lo_icu = p_value([](const Stay& s) { return s.meta.lo_icu_days; });
  t.p_lo_seq = p_value([](const Stay& s) { return s.lo_seq_hours; });
  for (std::size_t d = 0; d < kNumVariables; ++d) {
    t.p_tsm[d] = p_value([d](const Stay& s) { return compute_tsm(s.grids[d]); });
  }
  return t;
}

std::string cohort_table_csv(const CohortTable& t) {
  std::ostringstream os;
  os << "characteristic,all,y0,y1,p_value\n";
  auto count_row = [&](const char* name, std::size_t GroupStats::*field) {
    os << name << ',' << t.all.*field << ',' << t.group0.*field << ','
       << t.group1.*field << ",-\n";
  };
  auto dist_row = [&](const std::string& name, auto&& get, const std::string& p) {
    os << name << ',' << fmt_dist(get(t.all)) << ',' << fmt_dist(get(t.group0)) << ','
       << fmt_dist(get(t.group1)) << ',' << p << '\n';
  };
  count_row("n_subjects", &GroupStats::n_subjects);
  count_row("n_stays", &GroupStats::n_stays);
  count_row("n_records", &GroupStats::n_records);
  dist_row("age_years", [](const GroupStats& g) { return g.age_years; }, "-");
  dist_row("lo_icu_days", [](const GroupStats& g) { return g.lo_icu_days; },
           fmt_p(t.p_lo_icu));
  dist_row("lo_seq_hours", [](const GroupStats& g) { return g.lo_seq_hours; },
           fmt_p(t.p_lo_seq));
  for (std::size_t d = 0; d < kNumVariables; ++d) {
    dist_row(std::string(variable_name(kAllVariables[d])) + "_tsm_pct",
             [d](const GroupStats& g) { return g.tsm_pct[d]; }, fmt_p(t.p_tsm[d]));
  }
  return os.str();
}

}  // namespace tsmiss::eval
