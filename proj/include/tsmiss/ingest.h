#pragma once

#include <array>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsmiss/common.h"

namespace tsmiss {

// One raw observation. `hours` is relative to ICU admission.
struct EventRecord {
  std::string subject_id;
  std::string stay_id;
  Variable variable = Variable::kHr;
  double hours = 0.0;
  double value = 0.0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct StayMeta {
  std::string subject_id;
  std::string stay_id;
  double lo_icu_days = 0.0;
  double age_years = 0.0;
  int label = 0;  // 1 iff age_years >= age threshold

  friend bool operator==(const StayMeta&, const StayMeta&) = default;
};

inline constexpr double kDefaultAgeThreshold = 65.0;

struct ClampRange {
  double lower;
  double upper;
};

// Per-variable extreme value ranges; out-of-range values are clamped, never
// dropped.
struct ClampRanges {
  std::array<ClampRange, kNumVariables> ranges = {{
      {0.0, 300.0},  // hr
      {0.0, 100.0},  // spo2
      {0.0, 100.0},  // rr
      {0.0, 400.0},  // bp_sys
      {0.0, 350.0},  // bp_dia
  }};

  const ClampRange& operator[](Variable v) const { return ranges[index_of(v)]; }
};

struct GriddedSeries {
  std::string stay_id;
  Variable variable = Variable::kHr;
  std::array<std::optional<double>, kNumSlots> slots{};
};

// All five variables of one stay, indexed by Variable.
using StayGrids = std::array<GriddedSeries, kNumVariables>;

// A cohort member with its gridded first-24h series and whole-stay
// bookkeeping used by cohort statistics.
struct Stay {
  StayMeta meta;
  StayGrids grids;
  double lo_seq_hours = 0.0;
  std::size_t n_records = 0;
};

// CSV readers. A leading header line is recognised and skipped; blank lines
// are ignored. Throws ParseError with 1-based line and column.
std::vector<EventRecord> parse_events(std::istream& in);
std::vector<StayMeta> parse_stays(std::istream& in,
                                  double age_threshold = kDefaultAgeThreshold);

std::string events_csv_header();
std::string stays_csv_header();

// Keeps stays with 1 <= lo_icu_days <= 5, preserving order.
std::vector<StayMeta> filter_cohort(std::span<const StayMeta> stays);

// Throws DataError on non-finite input.
double clamp_value(Variable variable, double value,
                   const ClampRanges& ranges = {});

// Buckets events of one (stay, variable) into 24 hourly slots holding the
// mean of clamped values; events at or after hour 24 are ignored.
GriddedSeries grid_series(std::span<const EventRecord> events,
                          const ClampRanges& ranges = {});

// Number of hourly grid slots spanned by the stay's observations over the
// whole stay: floor(max timestamp) + 1, or 0 without events.
double lo_seq_hours(std::span<const EventRecord> events);

// Joins events to cohort-filtered stays. Stays keep input order; events of
// stays outside the cohort are dropped. Throws DataError on duplicate
// stay ids.
std::vector<Stay> assemble_stays(std::span<const EventRecord> events,
                                 std::span<const StayMeta> stays,
                                 const ClampRanges& ranges = {});

}  // namespace tsmiss
