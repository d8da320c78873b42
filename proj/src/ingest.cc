#include "tsmiss/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string_view>
#include <unordered_map>

namespace tsmiss {

namespace {

constexpr std::string_view kEventsHeader =
    "subject_id,stay_id,variable,hours_since_admission,value";
constexpr std::string_view kStaysHeader =
    "subject_id,stay_id,lo_icu_days,age_years";

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_real(std::string_view field, std::size_t line, std::size_t column,
                  std::string_view name) {
  double out = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(line, column,
                     "malformed " + std::string(name) + " '" +
                         std::string(field) + "'");
  }
  if (!std::isfinite(out)) {
    throw ParseError(line, column, "non-finite " + std::string(name));
  }
  return out;
}

void require_id(std::string_view field, std::size_t line, std::size_t column,
                std::string_view name) {
  if (field.empty()) {
    throw ParseError(line, column, "empty " + std::string(name));
  }
}

// Calls `row(fields, line_no)` for every data line, skipping blank lines and
// an optional header equal to `header`.
template <typename RowFn>
void for_each_row(std::istream& in, std::string_view header,
                  std::size_t n_fields, RowFn&& row) {
  std::string raw;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (first_content) {
      first_content = false;
      if (line.starts_with("subject_id")) {
        if (line != header) {
          throw ParseError(line_no, 1,
                           "unexpected header, want '" + std::string(header) +
                               "'");
        }
        continue;
      }
    }
    auto fields = split_fields(line);
    if (fields.size() != n_fields) {
      throw ParseError(line_no, std::min(fields.size(), n_fields) + 1,
                       "expected " + std::to_string(n_fields) +
                           " fields, got " + std::to_string(fields.size()));
    }
    row(fields, line_no);
  }
}

}  // namespace

std::string events_csv_header() { return std::string(kEventsHeader); }
std::string stays_csv_header() { return std::string(kStaysHeader); }

std::vector<EventRecord> parse_events(std::istream& in) {
  std::vector<EventRecord> out;
  for_each_row(in, kEventsHeader, 5, [&](const auto& f, std::size_t line) {
    require_id(f[0], line, 1, "subject_id");
    require_id(f[1], line, 2, "stay_id");
    const auto var = variable_from_name(f[2]);
    if (!var) {
      throw ParseError(line, 3, "unknown variable '" + std::string(f[2]) + "'");
    }
    const double hours = parse_real(f[3], line, 4, "hours_since_admission");
    if (hours < 0.0) throw ParseError(line, 4, "negative timestamp");
    const double value = parse_real(f[4], line, 5, "value");
    out.push_back({std::string(f[0]), std::string(f[1]), *var, hours, value});
  });
  return out;
}

std::vector<StayMeta> parse_stays(std::istream& in, double age_threshold) {
  std::vector<StayMeta> out;
  for_each_row(in, kStaysHeader, 4, [&](const auto& f, std::size_t line) {
    require_id(f[0], line, 1, "subject_id");
    require_id(f[1], line, 2, "stay_id");
    const double lo_icu = parse_real(f[2], line, 3, "lo_icu_days");
    if (lo_icu <= 0.0) throw ParseError(line, 3, "lo_icu_days must be positive");
    const double age = parse_real(f[3], line, 4, "age_years");
    out.push_back({std::string(f[0]), std::string(f[1]), lo_icu, age,
                   age >= age_threshold ? 1 : 0});
  });
  return out;
}

std::vector<StayMeta> filter_cohort(std::span<const StayMeta> stays) {
  std::vector<StayMeta> out;
  std::copy_if(stays.begin(), stays.end(), std::back_inserter(out),
               [](const StayMeta& s) {
                 return s.lo_icu_days >= 1.0 && s.lo_icu_days <= 5.0;
               });
  return out;
}

double clamp_value(Variable variable, double value, const ClampRanges& ranges) {
  if (!std::isfinite(value)) {
    throw DataError("clamp_value: non-finite value for " +
                    std::string(variable_name(variable)));
  }
  const auto& r = ranges[variable];
  return std::min(r.upper, std::max(r.lower, value));
}

GriddedSeries grid_series(std::span<const EventRecord> events,
                          const ClampRanges& ranges) {
  GriddedSeries out;
  if (events.empty()) return out;
  out.stay_id = events.front().stay_id;
  out.variable = events.front().variable;

  // Values are sorted per slot before summation so that the mean is
  // bit-identical under any input permutation.
  std::array<std::vector<double>, kNumSlots> buckets;
  for (const auto& e : events) {
    if (e.stay_id != out.stay_id || e.variable != out.variable) {
      throw DataError("grid_series: events span multiple stays or variables");
    }
    if (e.hours < 0.0) throw DataError("grid_series: negative timestamp");
    if (e.hours >= static_cast<double>(kNumSlots)) continue;
    const auto slot = static_cast<std::size_t>(std::floor(e.hours));
    buckets[slot].push_back(clamp_value(e.variable, e.value, ranges));
  }
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    auto& b = buckets[t];
    if (b.empty()) continue;
    std::sort(b.begin(), b.end());
    double sum = 0.0;
    for (double v : b) sum += v;
    out.slots[t] = sum / static_cast<double>(b.size());
  }
  return out;
}

double lo_seq_hours(std::span<const EventRecord> events) {
  if (events.empty()) return 0.0;
  double last = 0.0;
  for (const auto& e : events) last = std::max(last, e.hours);
  return std::floor(last) + 1.0;
}

std::vector<Stay> assemble_stays(std::span<const EventRecord> events,
                                 std::span<const StayMeta> stays,
                                 const ClampRanges& ranges) {
  const auto cohort = filter_cohort(stays);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    if (!index.emplace(cohort[i].stay_id, i).second) {
      throw DataError("duplicate stay_id '" + cohort[i].stay_id + "'");
    }
  }

  std::vector<std::vector<EventRecord>> per_stay(cohort.size());
  for (const auto& e : events) {
    auto it = index.find(e.stay_id);
    if (it == index.end()) continue;
    if (cohort[it->second].subject_id != e.subject_id) {
      throw DataError("event subject '" + e.subject_id +
                      "' does not match stay '" + e.stay_id + "'");
    }
    per_stay[it->second].push_back(e);
  }

  std::vector<Stay> out;
  out.reserve(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    Stay stay;
    stay.meta = cohort[i];
    stay.n_records = per_stay[i].size();
    stay.lo_seq_hours = lo_seq_hours(per_stay[i]);
    std::array<std::vector<EventRecord>, kNumVariables> by_var;
    for (auto& e : per_stay[i]) by_var[index_of(e.variable)].push_back(e);
    for (Variable v : kAllVariables) {
      auto g = grid_series(by_var[index_of(v)], ranges);
      g.stay_id = stay.meta.stay_id;
      g.variable = v;
      stay.grids[index_of(v)] = std::move(g);
    }
    out.push_back(std::move(stay));
  }
  return out;
}

}  // namespace tsmiss
