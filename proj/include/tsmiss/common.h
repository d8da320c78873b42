#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsmiss {

// The five vitals, in the fixed order used by every tensor and tabular row.
enum class Variable : std::uint8_t { kHr = 0, kSpo2, kRr, kBpSys, kBpDia };

inline constexpr std::size_t kNumVariables = 5;
inline constexpr std::size_t kNumSlots = 24;  // first 24h on a 1h grid
inline constexpr std::size_t kHiddenSize = 5;

inline constexpr std::array<Variable, kNumVariables> kAllVariables = {
    Variable::kHr, Variable::kSpo2, Variable::kRr, Variable::kBpSys,
    Variable::kBpDia};

std::string_view variable_name(Variable v);
std::optional<Variable> variable_from_name(std::string_view name);

inline constexpr std::size_t index_of(Variable v) {
  return static_cast<std::size_t>(v);
}

// Error hierarchy. The CLI maps ConfigError to exit code 2 and every other
// Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Components that draw randomness from the single run seed.
enum class SeedStream : std::uint64_t {
  kSplit = 1,
  kGrudInit = 2,
  kGrudShuffle = 3,
  kBootstrap = 4,
  kSynth = 5,
};

// splitmix64 finalizer over (seed, stream); stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream,
                          std::uint64_t index = 0);

// Logistic function, clamped so the result lies strictly inside (0, 1).
double sigmoid(double v);

// Shortest decimal representation that round-trips through strtod.
std::string format_double(double value);

}  // namespace tsmiss
