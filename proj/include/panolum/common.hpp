#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace panolum {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy, mapped to CLI exit codes: preconditions ->
// std::invalid_argument (usage), malformed/corrupt inputs -> FormatError /
// DataError (data), diverged computations -> NumericError (numeric).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedFormatError : FormatError {
  using FormatError::FormatError;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorruptDataError : DataError {
  using DataError::DataError;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double d) { return d * (kPi / 180.0); }
constexpr double rad2deg(double r) { return r * (180.0 / kPi); }

// Luminance ceiling used for ingest clamping and normalization: the solar
// disc, ~1.6e9 cd/m2.
inline constexpr double kSunLuminance = 1.6e9;

}  // namespace panolum
