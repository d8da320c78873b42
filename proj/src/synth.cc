#include "tsmiss/synth.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace tsmiss::synth {

namespace {

std::string field_name(const char* name, std::size_t label, std::size_t d) {
  return std::string(name) + "[" + std::to_string(label) + "][" +
         std::string(variable_name(kAllVariables[d])) + "]";
}

std::string padded_id(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, n);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_subjects == 0) throw ConfigError("n_subjects must be positive");
  if (min_stays_per_subject == 0 || max_stays_per_subject < min_stays_per_subject) {
    throw ConfigError("stays_per_subject must satisfy 1 <= min <= max");
  }
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t d = 0; d < kNumVariables; ++d) {
      if (!(obs_prob[c][d] >= 0.0 && obs_prob[c][d] <= 1.0)) {
        throw ConfigError(field_name("obs_prob", c, d) + " must lie in [0, 1]");
      }
      if (!std::isfinite(value_mean[c][d])) {
        throw ConfigError(field_name("value_mean", c, d) + " must be finite");
      }
      if (!(value_sd[c][d] >= 0.0) || !std::isfinite(value_sd[c][d])) {
        throw ConfigError(field_name("value_sd", c, d) + " must be non-negative");
      }
    }
  }
  if (!(lo_icu_min_days >= 1.0 && lo_icu_max_days <= 5.0 &&
        lo_icu_min_days <= lo_icu_max_days)) {
    throw ConfigError("lo_icu_days must satisfy 1 <= min <= max <= 5");
  }
  if (!(class_balance > 0.0 && class_balance < 1.0)) {
    throw ConfigError("class_balance must lie in (0, 1)");
  }
}

SynthConfig missingness_only_scenario() {
  SynthConfig c;
  c.n_subjects = 2000;
  c.class_balance = 0.5;
  const PerVariable mean = {80.0, 96.0, 18.0, 120.0, 65.0};
  const PerVariable sd = {12.0, 2.0, 4.0, 18.0, 10.0};
  c.value_mean = {mean, mean};
  c.value_sd = {sd, sd};
  c.obs_prob[0].fill(0.5);
  c.obs_prob[1].fill(0.8);
  return c;
}

SynthData generate(const SynthConfig& config, const ClampRanges& ranges) {
  config.validate();
  SynthData out;
  std::size_t stay_counter = 0;
  std::mt19937_64 subject_rng(derive_seed(config.seed, SeedStream::kSynth));
  std::uniform_int_distribution<std::size_t> n_stays_dist(config.min_stays_per_subject,
                                                          config.max_stays_per_subject);
  // Quantized draws keep the CSV short and its decimal text exact.
  const auto lo_icu_lo = static_cast<long>(std::lround(config.lo_icu_min_days * 100.0));
  const auto lo_icu_hi = static_cast<long>(std::lround(config.lo_icu_max_days * 100.0));

  for (std::size_t subj = 0; subj < config.n_subjects; ++subj) {
    const std::string subject_id = padded_id("subj", subj + 1);
    const std::size_t n_stays = n_stays_dist(subject_rng);
    for (std::size_t k = 0; k < n_stays; ++k, ++stay_counter) {
      std::mt19937_64 rng(derive_seed(config.seed, SeedStream::kSynth, stay_counter + 1));
      StayMeta meta;
      meta.subject_id = subject_id;
      meta.stay_id = padded_id("stay", stay_counter + 1);
      meta.label = std::bernoulli_distribution(config.class_balance)(rng) ? 1 : 0;
      // Ages in tenths of a year: [18.0, 64.9] for y = 0, [65.0, 89.9] for y = 1.
      const long age_tenths = meta.label == 1
                                  ? std::uniform_int_distribution<long>(650, 899)(rng)
                                  : std::uniform_int_distribution<long>(180, 649)(rng);
      meta.age_years = static_cast<double>(age_tenths) / 10.0;
      meta.lo_icu_days =
          static_cast<double>(std::uniform_int_distribution<long>(lo_icu_lo, lo_icu_hi)(rng)) /
          100.0;

      std::uniform_int_distribution<int> offset_ms(0, 999);
      for (std::size_t t = 0; t < kNumSlots; ++t) {
        for (std::size_t d = 0; d < kNumVariables; ++d) {
          const auto c = static_cast<std::size_t>(meta.label);
          if (!std::bernoulli_distribution(config.obs_prob[c][d])(rng)) continue;
          const double hours =
              static_cast<double>(static_cast<long>(t) * 1000 + offset_ms(rng)) / 1000.0;
          double value = config.value_mean[c][d];
          if (config.value_sd[c][d] > 0.0) {
            value = std::normal_distribution<double>(config.value_mean[c][d],
                                                     config.value_sd[c][d])(rng);
          }
          value = std::round(clamp_value(kAllVariables[d], value, ranges) * 10.0) / 10.0;
          out.events.push_back({meta.subject_id, meta.stay_id, kAllVariables[d], hours, value});
        }
      }
      out.stays.push_back(std::move(meta));
    }
  }
  out.events_csv = events_to_csv(out.events);
  out.stays_csv = stays_to_csv(out.stays);
  return out;
}

std::string events_to_csv(const std::vector<EventRecord>& events) {
  std::ostringstream os;
  os << events_csv_header() << '\n';
  for (const auto& e : events) {
    os << e.subject_id << ',' << e.stay_id << ',' << variable_name(e.variable) << ','
       << format_double(e.hours) << ',' << format_double(e.value) << '\n';
  }
  return os.str();
}

std::string stays_to_csv(const std::vector<StayMeta>& stays) {
  std::ostringstream os;
  os << stays_csv_header() << '\n';
  for (const auto& s : stays) {
    os << s.subject_id << ',' << s.stay_id << ',' << format_double(s.lo_icu_days) << ','
       << format_double(s.age_years) << '\n';
  }
  return os.str();
}

}  // namespace tsmiss::synth
