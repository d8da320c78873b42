#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tsmiss/ingest.h"

namespace tsmiss::synth {

using PerVariable = std::array<double, kNumVariables>;
using PerClass = std::array<PerVariable, 2>;  // indexed by label

// Class-conditional generator settings. Each hourly slot of each variable
// independently yields one observation with probability obs_prob[label][d].
struct SynthConfig {
  std::size_t n_subjects = 2000;
  std::size_t min_stays_per_subject = 1;
  std::size_t max_stays_per_subject = 1;
  PerClass obs_prob{};
  PerClass value_mean{};
  PerClass value_sd{};
  double lo_icu_min_days = 1.0;
  double lo_icu_max_days = 5.0;
  double class_balance = 0.5;  // P(label = 1)
  std::uint64_t seed = 42;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct SynthData {
  std::vector<EventRecord> events;
  std::vector<StayMeta> stays;  // labels already set
  std::string events_csv;
  std::string stays_csv;
};

// Deterministic per seed; stay i draws from derive_seed(seed, kSynth, i).
SynthData generate(const SynthConfig& config, const ClampRanges& ranges = {});

// Identical value distributions for both classes; only the observation
// probability differs (0.5 for y = 0, 0.8 for y = 1).
SynthConfig missingness_only_scenario();

std::string events_to_csv(const std::vector<EventRecord>& events);
std::string stays_to_csv(const std::vector<StayMeta>& stays);

}  // namespace tsmiss::synth
