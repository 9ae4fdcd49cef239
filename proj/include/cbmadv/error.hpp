#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cbmadv {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// features
struct SignalTooShort : Error {
  using Error::Error;
};
struct DegenerateWindow : Error {
  using Error::Error;
};
struct ZeroVarianceFeature : Error {
  ZeroVarianceFeature(std::size_t column_index, const std::string& what)
      : Error(what), column(column_index) {}
  std::size_t column;
};

// data
struct ParseError : Error {
  ParseError(std::size_t line_number, const std::string& what)
      : Error(what), line(line_number) {}
  std::size_t line;
};
struct UnknownLabel : Error {
  using Error::Error;
};
struct ClassTooSmall : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct InvalidK : Error {
  using Error::Error;
};

// models
struct NonFiniteLoss : Error {
  NonFiniteLoss(int epoch_index, const std::string& what)
      : Error(what), epoch(epoch_index) {}
  int epoch;
};
struct SingularCovariance : Error {
  using Error::Error;
};
struct EmptyClass : Error {
  using Error::Error;
};

// attack
struct EmptyPool : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};

// eval
struct LengthMismatch : Error {
  using Error::Error;
};

}  // namespace cbmadv
