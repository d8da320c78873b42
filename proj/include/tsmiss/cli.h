#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsmiss/json_io.h"

namespace tsmiss::cli {

inline constexpr const char* kVersion = "tsmiss 1.0.0";

// Fixed output file names under --out.
inline constexpr const char* kEventsFile = "events.csv";
inline constexpr const char* kStaysFile = "stays.csv";
inline constexpr const char* kCohortFile = "cohort.csv";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kDecayJsonFile = "decay_summary.json";
inline constexpr const char* kDecayCsvFile = "decay_summary.csv";

std::string model_file_name(ModelKind kind);         // model_<kind>.json
std::string loss_history_file_name(ModelKind kind);  // loss_history_<kind>.csv

struct SynthOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;  // overrides the config's seed
};

struct DataOptions {
  std::filesystem::path events;
  std::filesystem::path stays;
  std::filesystem::path out;
};

struct StatsOptions {
  DataOptions data;
  double age_threshold = 65.0;
};

struct TrainOptions {
  DataOptions data;
  ModelKind model = ModelKind::kGrud;
  std::optional<std::filesystem::path> config;
  std::uint64_t seed = 42;
  double age_threshold = 65.0;
  double train_fraction = 0.7;
};

struct EvaluateOptions {
  DataOptions data;
  std::vector<std::filesystem::path> models;
  std::uint64_t seed = 42;  // bootstrap seed
};

struct InterpretOptions {
  DataOptions data;
  std::filesystem::path model;
};

void cmd_synth(const SynthOptions& options);
void cmd_stats(const StatsOptions& options);
void cmd_train(const TrainOptions& options);
void cmd_evaluate(const EvaluateOptions& options);
void cmd_interpret(const InterpretOptions& options);

// Parses argv and dispatches. Returns the process exit code:
// 0 success, 1 runtime/data error, 2 usage/config error.
int run(int argc, const char* const* argv);

}  // namespace tsmiss::cli
