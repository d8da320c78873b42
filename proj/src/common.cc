#include "tsmiss/common.h"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <system_error>

namespace tsmiss {

namespace {
constexpr std::array<std::string_view, kNumVariables> kNames = {
    "hr", "spo2", "rr", "bp_sys", "bp_dia"};
}  // namespace

std::string_view variable_name(Variable v) { return kNames[index_of(v)]; }

std::optional<Variable> variable_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kAllVariables[i];
  }
  return std::nullopt;
}

ParseError::ParseError(std::size_t line, std::size_t column,
                       const std::string& what)
    : DataError("line " + std::to_string(line) + ", column " +
                std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream,
                          std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  h = mix(h ^ static_cast<std::uint64_t>(stream));
  return mix(h ^ index);
}

double sigmoid(double v) {
  double p;
  if (v >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-v));
  } else {
    const double e = std::exp(v);
    p = e / (1.0 + e);
  }
  constexpr double kLow = std::numeric_limits<double>::min();
  constexpr double kHigh = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(p, kLow, kHigh);
}

std::string format_double(double value) {
  if (!std::isfinite(value)) {
    return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error("format_double: buffer too small");
  return std::string(buf, ptr);
}

}  // namespace tsmiss
