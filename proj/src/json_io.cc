#include "tsmiss/json_io.h"

#include <set>

namespace tsmiss {

namespace {

template <typename Err = DataError>
const Json& require(const Json& j, const std::string& key) {
  if (!j.is_object()) throw Err("expected a JSON object around '" + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw Err("missing field '" + key + "'");
  return *it;
}

template <typename Err = DataError>
double as_number(const Json& j, const std::string& name) {
  if (!j.is_number()) throw Err("field '" + name + "' must be a number");
  return j.get<double>();
}

template <typename Err = DataError>
std::uint64_t as_count(const Json& j, const std::string& name) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw Err("field '" + name + "' must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

template <typename Err = DataError>
std::vector<double> as_vector(const Json& j, const std::string& name, std::size_t n) {
  if (!j.is_array() || j.size() != n) {
    throw Err("field '" + name + "' must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(as_number<Err>(j[i], name + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename Err = DataError>
void reject_unknown(const Json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw Err(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw Err("unknown field '" + it.key() + "' in " + where);
    }
  }
}

template <std::size_t N>
Json array_json(const std::array<double, N>& a) {
  return Json(std::vector<double>(a.begin(), a.end()));
}

template <std::size_t N>
std::array<double, N> array_from(const Json& j, const std::string& name) {
  const auto v = as_vector(j, name, N);
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

Json matrix_json(const SeriesMatrix& m) {
  Json out = Json::array();
  for (const auto& row : m) out.push_back(array_json(row));
  return out;
}

SeriesMatrix matrix_from(const Json& j, const std::string& name) {
  if (!j.is_array() || j.size() != kNumSlots) {
    throw DataError("field '" + name + "' must have " + std::to_string(kNumSlots) + " rows");
  }
  SeriesMatrix m{};
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    m[t] = array_from<kNumVariables>(j[t], name + "[" + std::to_string(t) + "]");
  }
  return m;
}

int label_from(const Json& j) {
  const auto& l = require(j, "label");
  if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) {
    throw DataError("field 'label' must be 0 or 1");
  }
  return l.get<int>();
}

// Block entries of GrudParams keep their Eigen (column-major) layout in
// memory; JSON stores matrices row-major as nested arrays.
constexpr auto kRows = static_cast<Eigen::Index>(kHiddenSize);
constexpr auto kCols = static_cast<Eigen::Index>(kNumVariables);

}  // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const TrainStats& s) {
  Json j;
  j["mean"] = array_json(s.mean);
  j["sd"] = array_json(s.sd);
  j["tabular_mean"] = array_json(s.tabular_mean);
  j["tabular_sd"] = array_json(s.tabular_sd);
  return j;
}

TrainStats train_stats_from_json(const Json& j) {
  reject_unknown(j, {"mean", "sd", "tabular_mean", "tabular_sd"}, "train_stats");
  TrainStats s;
  s.mean = array_from<kNumVariables>(require(j, "mean"), "mean");
  s.sd = array_from<kNumVariables>(require(j, "sd"), "sd");
  s.tabular_mean =
      array_from<kNumTabularFeatures>(require(j, "tabular_mean"), "tabular_mean");
  s.tabular_sd = array_from<kNumTabularFeatures>(require(j, "tabular_sd"), "tabular_sd");
  for (double v : s.sd) {
    if (!(v > 0.0)) throw DataError("train_stats: sd entries must be positive");
  }
  for (double v : s.tabular_sd) {
    if (!(v > 0.0)) throw DataError("train_stats: tabular_sd entries must be positive");
  }
  return s;
}

Json to_json(const FeatureTensor& t) {
  Json j;
  j["x"] = matrix_json(t.x);
  j["bmi"] = matrix_json(t.bmi);
  j["delta"] = matrix_json(t.delta);
  j["lov"] = matrix_json(t.lov);
  j["label"] = t.label;
  return j;
}

FeatureTensor feature_tensor_from_json(const Json& j) {
  reject_unknown(j, {"x", "bmi", "delta", "lov", "label"}, "feature tensor");
  FeatureTensor t;
  t.x = matrix_from(require(j, "x"), "x");
  t.bmi = matrix_from(require(j, "bmi"), "bmi");
  t.delta = matrix_from(require(j, "delta"), "delta");
  t.lov = matrix_from(require(j, "lov"), "lov");
  t.label = label_from(j);
  return t;
}

Json to_json(const TabularRow& row) {
  Json features = Json::object();
  for (std::size_t k = 0; k < kNumTabularFeatures; ++k) {
    features[tabular_feature_name(k)] = row.features[k];
  }
  Json j;
  j["features"] = features;
  j["label"] = row.label;
  return j;
}

TabularRow tabular_row_from_json(const Json& j) {
  reject_unknown(j, {"features", "label"}, "tabular row");
  const auto& f = require(j, "features");
  if (!f.is_object() || f.size() != kNumTabularFeatures) {
    throw DataError("tabular row must have exactly " +
                    std::to_string(kNumTabularFeatures) + " features");
  }
  TabularRow row;
  for (std::size_t k = 0; k < kNumTabularFeatures; ++k) {
    const auto name = tabular_feature_name(k);
    row.features[k] = as_number(require(f, name), name);
  }
  row.label = label_from(j);
  return row;
}

Json to_json(const grud::GrudParams& params) {
  Json j;
  grud::GrudParams::visit(params, [&](const char* name, const double* data,
                                      Eigen::Index count, bool) {
    if (count == kRows * kCols) {
      Json rows = Json::array();
      for (Eigen::Index r = 0; r < kRows; ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < kCols; ++c) row.push_back(data[c * kRows + r]);
        rows.push_back(row);
      }
      j[name] = rows;
    } else if (count == 1) {
      j[name] = data[0];
    } else {
      j[name] = std::vector<double>(data, data + count);
    }
  });
  return j;
}

grud::GrudParams grud_params_from_json(const Json& j) {
  grud::GrudParams p;
  std::set<std::string> names;
  grud::GrudParams::visit(p, [&](const char* name, double* data, Eigen::Index count,
                                 bool) {
    names.insert(name);
    const Json& v = require(j, name);
    if (count == kRows * kCols) {
      if (!v.is_array() || v.size() != static_cast<std::size_t>(kRows)) {
        throw DataError("field '" + std::string(name) + "' must be a 5x5 matrix");
      }
      for (Eigen::Index r = 0; r < kRows; ++r) {
        const auto row = as_vector(v[static_cast<std::size_t>(r)],
                                   std::string(name) + "[" + std::to_string(r) + "]",
                                   static_cast<std::size_t>(kCols));
        for (Eigen::Index c = 0; c < kCols; ++c) {
          data[c * kRows + r] = row[static_cast<std::size_t>(c)];
        }
      }
    } else if (count == 1) {
      data[0] = as_number(v, name);
    } else {
      const auto vec = as_vector(v, name, static_cast<std::size_t>(count));
      std::copy(vec.begin(), vec.end(), data);
    }
  });
  reject_unknown(j, names, "GRU-D params");
  if (!p.all_finite()) throw DataError("GRU-D params contain non-finite values");
  return p;
}

Json to_json(const grud::TrainConfig& c) {
  Json j;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  return j;
}

namespace {

grud::TrainConfig grud_config_from_json(const Json& j, grud::TrainConfig c,
                                        bool allow_seed) {
  std::set<std::string> allowed = {"batch_size",  "learning_rate", "epochs",
                                   "adam_beta1",  "adam_beta2",    "adam_epsilon"};
  if (allow_seed) allowed.insert("seed");
  reject_unknown<ConfigError>(j, allowed, "grud config");
  if (j.contains("batch_size")) c.batch_size = as_count<ConfigError>(j["batch_size"], "batch_size");
  if (j.contains("learning_rate")) {
    c.learning_rate = as_number<ConfigError>(j["learning_rate"], "learning_rate");
  }
  if (j.contains("epochs")) c.epochs = as_count<ConfigError>(j["epochs"], "epochs");
  if (j.contains("seed")) c.seed = as_count<ConfigError>(j["seed"], "seed");
  if (j.contains("adam_beta1")) c.adam_beta1 = as_number<ConfigError>(j["adam_beta1"], "adam_beta1");
  if (j.contains("adam_beta2")) c.adam_beta2 = as_number<ConfigError>(j["adam_beta2"], "adam_beta2");
  if (j.contains("adam_epsilon")) {
    c.adam_epsilon = as_number<ConfigError>(j["adam_epsilon"], "adam_epsilon");
  }
  c.validate();
  return c;
}

}  // namespace

Json to_json(const baselines::LogRegModel& m) {
  Json coef = Json::object();
  for (std::size_t k = 0; k < m.coefficients.size(); ++k) {
    coef[m.coefficients.size() == kNumTabularFeatures ? tabular_feature_name(k)
                                                      : "f" + std::to_string(k)] =
        m.coefficients[k];
  }
  Json j;
  j["coefficients"] = coef;
  j["intercept"] = m.intercept;
  j["penalty_c"] = m.penalty_c;
  j["iterations"] = m.iterations;
  j["converged"] = m.converged;
  j["objective"] = m.objective;
  return j;
}

baselines::LogRegModel logreg_from_json(const Json& j) {
  reject_unknown(j, {"coefficients", "intercept", "penalty_c", "iterations", "converged",
                     "objective"},
                 "logreg model");
  baselines::LogRegModel m;
  const auto& coef = require(j, "coefficients");
  if (!coef.is_object() || coef.size() != kNumTabularFeatures) {
    throw DataError("logreg model must have exactly " +
                    std::to_string(kNumTabularFeatures) + " coefficients");
  }
  for (std::size_t k = 0; k < kNumTabularFeatures; ++k) {
    const auto name = tabular_feature_name(k);
    m.coefficients.push_back(as_number(require(coef, name), name));
  }
  m.intercept = as_number(require(j, "intercept"), "intercept");
  m.penalty_c = as_number(require(j, "penalty_c"), "penalty_c");
  m.iterations = as_count(require(j, "iterations"), "iterations");
  const auto& conv = require(j, "converged");
  if (!conv.is_boolean()) throw DataError("field 'converged' must be a boolean");
  m.converged = conv.get<bool>();
  m.objective = as_number(require(j, "objective"), "objective");
  return m;
}

Json to_json(const baselines::StumpEnsemble& m) {
  Json stumps = Json::array();
  for (const auto& s : m.stumps) {
    stumps.push_back(Json{{"feature", s.feature},
                          {"threshold", s.threshold},
                          {"left", s.left},
                          {"right", s.right}});
  }
  Json j;
  j["base_score"] = m.base_score;
  j["shrinkage"] = m.shrinkage;
  j["n_features"] = m.n_features;
  j["stopped_early"] = m.stopped_early;
  j["stumps"] = stumps;
  j["train_loss"] = m.train_loss;
  return j;
}

baselines::StumpEnsemble stumps_from_json(const Json& j) {
  reject_unknown(j, {"base_score", "shrinkage", "n_features", "stopped_early", "stumps",
                     "train_loss"},
                 "stump ensemble");
  baselines::StumpEnsemble m;
  m.base_score = as_number(require(j, "base_score"), "base_score");
  m.shrinkage = as_number(require(j, "shrinkage"), "shrinkage");
  m.n_features = as_count(require(j, "n_features"), "n_features");
  const auto& early = require(j, "stopped_early");
  if (!early.is_boolean()) throw DataError("field 'stopped_early' must be a boolean");
  m.stopped_early = early.get<bool>();
  const auto& stumps = require(j, "stumps");
  if (!stumps.is_array()) throw DataError("field 'stumps' must be an array");
  for (const auto& s : stumps) {
    reject_unknown(s, {"feature", "threshold", "left", "right"}, "stump");
    baselines::Stump st;
    st.feature = as_count(require(s, "feature"), "feature");
    if (st.feature >= m.n_features) throw DataError("stump feature index out of range");
    st.threshold = as_number(require(s, "threshold"), "threshold");
    st.left = as_number(require(s, "left"), "left");
    st.right = as_number(require(s, "right"), "right");
    m.stumps.push_back(st);
  }
  const auto& loss = require(j, "train_loss");
  m.train_loss = as_vector(loss, "train_loss", loss.is_array() ? loss.size() : 0);
  return m;
}

Json to_json(const synth::SynthConfig& c) {
  auto per_class = [](const synth::PerClass& v) {
    return Json::array({array_json(v[0]), array_json(v[1])});
  };
  Json j;
  j["n_subjects"] = c.n_subjects;
  j["stays_per_subject"] = Json::array({c.min_stays_per_subject, c.max_stays_per_subject});
  j["obs_prob"] = per_class(c.obs_prob);
  j["value_mean"] = per_class(c.value_mean);
  j["value_sd"] = per_class(c.value_sd);
  j["lo_icu_days"] = Json::array({c.lo_icu_min_days, c.lo_icu_max_days});
  j["class_balance"] = c.class_balance;
  j["seed"] = c.seed;
  return j;
}

synth::SynthConfig synth_config_from_json(const Json& j, synth::SynthConfig c) {
  reject_unknown<ConfigError>(j,
                              {"n_subjects", "stays_per_subject", "obs_prob", "value_mean",
                               "value_sd", "lo_icu_days", "class_balance", "seed"},
                              "synth config");
  auto per_class = [&](const char* name, synth::PerClass& out) {
    if (!j.contains(name)) return;
    const Json& v = j[name];
    if (!v.is_array() || v.size() != 2) {
      throw ConfigError(std::string("field '") + name + "' must be [[5 numbers], [5 numbers]]");
    }
    for (std::size_t c = 0; c < 2; ++c) {
      const auto row = as_vector<ConfigError>(
          v[c], std::string(name) + "[" + std::to_string(c) + "]", kNumVariables);
      std::copy(row.begin(), row.end(), out[c].begin());
    }
  };
  if (j.contains("n_subjects")) c.n_subjects = as_count<ConfigError>(j["n_subjects"], "n_subjects");
  if (j.contains("stays_per_subject")) {
    const Json& v = j["stays_per_subject"];
    if (!v.is_array() || v.size() != 2) {
      throw ConfigError("field 'stays_per_subject' must be [min, max]");
    }
    c.min_stays_per_subject = as_count<ConfigError>(v[0], "stays_per_subject[0]");
    c.max_stays_per_subject = as_count<ConfigError>(v[1], "stays_per_subject[1]");
  }
  per_class("obs_prob", c.obs_prob);
  per_class("value_mean", c.value_mean);
  per_class("value_sd", c.value_sd);
  if (j.contains("lo_icu_days")) {
    const auto v = as_vector<ConfigError>(j["lo_icu_days"], "lo_icu_days", 2);
    c.lo_icu_min_days = v[0];
    c.lo_icu_max_days = v[1];
  }
  if (j.contains("class_balance")) {
    c.class_balance = as_number<ConfigError>(j["class_balance"], "class_balance");
  }
  if (j.contains("seed")) c.seed = as_count<ConfigError>(j["seed"], "seed");
  c.validate();
  return c;
}

Json to_json(const interpret::DecaySummary& s) {
  Json dx = Json::object();
  for (std::size_t d = 0; d < kNumVariables; ++d) {
    dx[std::string(variable_name(kAllVariables[d]))] = s.dx_per_feature[d];
  }
  Json dh = Json::object();
  for (std::size_t u = 0; u < kHiddenSize; ++u) {
    dh["unit_" + std::to_string(u)] = s.dh_per_unit[u];
  }
  Json j;
  j["n_stays"] = s.n_stays;
  j["dx_per_feature"] = dx;
  j["dh_per_unit"] = dh;
  j["dx_per_timestep"] = array_json(s.dx_per_timestep);
  j["dh_per_timestep"] = array_json(s.dh_per_timestep);
  j["dx_overall"] = s.dx_overall;
  j["dh_overall"] = s.dh_overall;
  j["note"] =
      "dh_per_unit is indexed by hidden unit, not by input variable; the hidden "
      "size equals the number of variables only by construction.";
  return j;
}

Json to_json(const eval::BootstrapResult& r) {
  Json j;
  j["point"] = r.point;
  j["mean"] = r.mean;
  j["ci_lower"] = r.lower;
  j["ci_upper"] = r.upper;
  j["replicates"] = r.replicates;
  return j;
}

ModelConfig model_config_from_json(const Json& j) {
  reject_unknown<ConfigError>(j, {"grud", "logreg", "stumps"}, "model config");
  ModelConfig c;
  if (j.contains("grud")) c.grud = grud_config_from_json(j["grud"], c.grud, false);
  if (j.contains("logreg")) {
    const Json& l = j["logreg"];
    reject_unknown<ConfigError>(l, {"penalty_c", "tolerance", "max_iterations"},
                                "logreg config");
    if (l.contains("penalty_c")) c.logreg.penalty_c = as_number<ConfigError>(l["penalty_c"], "penalty_c");
    if (l.contains("tolerance")) c.logreg.tolerance = as_number<ConfigError>(l["tolerance"], "tolerance");
    if (l.contains("max_iterations")) {
      c.logreg.max_iterations = as_count<ConfigError>(l["max_iterations"], "max_iterations");
    }
    if (!(c.logreg.penalty_c > 0.0)) throw ConfigError("field 'penalty_c' must be positive");
  }
  if (j.contains("stumps")) {
    const Json& s = j["stumps"];
    reject_unknown<ConfigError>(s, {"n_estimators", "shrinkage"}, "stumps config");
    if (s.contains("n_estimators")) {
      c.stumps.n_estimators = as_count<ConfigError>(s["n_estimators"], "n_estimators");
    }
    if (s.contains("shrinkage")) c.stumps.shrinkage = as_number<ConfigError>(s["shrinkage"], "shrinkage");
    if (!(c.stumps.shrinkage > 0.0)) throw ConfigError("field 'shrinkage' must be positive");
  }
  return c;
}

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGrud: return "grud";
    case ModelKind::kLogReg: return "logreg";
    case ModelKind::kStumps: return "stumps";
  }
  return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "grud") return ModelKind::kGrud;
  if (name == "logreg") return ModelKind::kLogReg;
  if (name == "stumps") return ModelKind::kStumps;
  throw ConfigError("unknown model '" + name + "' (expected grud, logreg or stumps)");
}

Json to_json(const ModelFile& f) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = model_kind_name(f.kind());
  j["seed"] = f.seed;
  j["train_frac"] = f.train_fraction;
  j["age_threshold"] = f.age_threshold;
  j["train_stats"] = to_json(f.stats);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GrudModel>) {
          j["train_config"] = to_json(m.config);
          j["initial_loss"] = m.initial_loss;
          j["epoch_loss"] = m.epoch_loss;
          j["params"] = to_json(m.params);
        } else {
          j["params"] = to_json(m);
        }
      },
      f.model);
  return j;
}

ModelFile model_file_from_json(const Json& j) {
  const auto& version = require(j, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    throw DataError("unsupported model format_version");
  }
  const auto& kind_json = require(j, "kind");
  if (!kind_json.is_string()) throw DataError("field 'kind' must be a string");
  ModelKind kind;
  try {
    kind = model_kind_from_name(kind_json.get<std::string>());
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  std::set<std::string> allowed = {"format_version", "kind", "seed", "train_frac",
                                   "age_threshold", "train_stats", "params"};
  if (kind == ModelKind::kGrud) allowed.insert({"train_config", "initial_loss", "epoch_loss"});
  reject_unknown(j, allowed, "model file");

  ModelFile f;
  f.seed = as_count(require(j, "seed"), "seed");
  f.train_fraction = as_number(require(j, "train_frac"), "train_frac");
  f.age_threshold = as_number(require(j, "age_threshold"), "age_threshold");
  f.stats = train_stats_from_json(require(j, "train_stats"));
  const auto& params = require(j, "params");
  switch (kind) {
    case ModelKind::kGrud: {
      GrudModel m;
      m.params = grud_params_from_json(params);
      try {
        m.config = grud_config_from_json(require(j, "train_config"), {}, true);
      } catch (const ConfigError& e) {
        throw DataError(std::string("train_config: ") + e.what());
      }
      m.initial_loss = as_number(require(j, "initial_loss"), "initial_loss");
      const auto& el = require(j, "epoch_loss");
      m.epoch_loss = as_vector(el, "epoch_loss", el.is_array() ? el.size() : 0);
      f.model = std::move(m);
      break;
    }
    case ModelKind::kLogReg:
      f.model = logreg_from_json(params);
      break;
    case ModelKind::kStumps:
      f.model = stumps_from_json(params);
      break;
  }
  return f;
}

}  // namespace tsmiss
