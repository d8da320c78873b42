#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tsmiss/baselines.h"
#include "tsmiss/eval.h"
#include "tsmiss/features.h"
#include "tsmiss/grud.h"
#include "tsmiss/interpret.h"
#include "tsmiss/synth.h"

namespace tsmiss {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// Readers validate shapes exactly and throw DataError (ConfigError for
// user-supplied configuration) naming the offending field.

Json to_json(const TrainStats& stats);
TrainStats train_stats_from_json(const Json& j);

Json to_json(const FeatureTensor& tensor);
FeatureTensor feature_tensor_from_json(const Json& j);

Json to_json(const TabularRow& row);
TabularRow tabular_row_from_json(const Json& j);

Json to_json(const grud::GrudParams& params);
grud::GrudParams grud_params_from_json(const Json& j);

Json to_json(const grud::TrainConfig& config);

Json to_json(const baselines::LogRegModel& model);
baselines::LogRegModel logreg_from_json(const Json& j);

Json to_json(const baselines::StumpEnsemble& model);
baselines::StumpEnsemble stumps_from_json(const Json& j);

Json to_json(const synth::SynthConfig& config);
// Keys absent from `j` keep the values of `base`; unknown keys are rejected.
synth::SynthConfig synth_config_from_json(const Json& j, synth::SynthConfig base);

Json to_json(const interpret::DecaySummary& summary);
Json to_json(const eval::BootstrapResult& result);

// Optional training settings for every model kind, read from the --config
// file of `train`: {"grud": {...}, "logreg": {...}, "stumps": {...}}.
struct ModelConfig {
  grud::TrainConfig grud;
  baselines::LogRegOptions logreg;
  baselines::StumpOptions stumps;
};
ModelConfig model_config_from_json(const Json& j);

enum class ModelKind { kGrud, kLogReg, kStumps };
std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct GrudModel {
  grud::GrudParams params;
  grud::TrainConfig config;
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;
};

// A persisted trained model with everything needed to rebuild its test split
// and featurization.
struct ModelFile {
  std::uint64_t seed = 42;
  double train_fraction = 0.7;
  double age_threshold = 65.0;
  TrainStats stats;
  std::variant<GrudModel, baselines::LogRegModel, baselines::StumpEnsemble> model;

  ModelKind kind() const { return static_cast<ModelKind>(model.index()); }
};

Json to_json(const ModelFile& file);
ModelFile model_file_from_json(const Json& j);

std::string dump(const Json& j);

}  // namespace tsmiss
