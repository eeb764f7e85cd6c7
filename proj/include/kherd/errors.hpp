#pragma once

#include <stdexcept>
#include <string>

namespace kherd {

// Base for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid run configuration (bad flag value, mode/target mismatch, ...).
// The CLI maps these to exit code 2; numeric failures map to exit code 3.
struct ConfigError : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// NaN or infinity where a finite value is required.
struct NonFinite : Error {
  using Error::Error;
};

struct NotPositiveDefinite : Error {
  using Error::Error;
};

struct EmptyDistribution : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  using Error::Error;
};

struct RaggedRows : Error {
  using Error::Error;
};

struct UnsupportedOrder : Error {
  using Error::Error;
};

struct EmptyCandidates : Error {
  using Error::Error;
};

struct EmptyHistory : Error {
  using Error::Error;
};

struct AscentDiverged : Error {
  using Error::Error;
};

struct EmptySamples : Error {
  using Error::Error;
};

struct DegenerateTrace : Error {
  using Error::Error;
};

struct KernelMismatch : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& what, long row_1based)
      : Error(what + " (row " + std::to_string(row_1based) + ")"), row(row_1based) {}
  explicit ParseError(const std::string& what) : Error(what), row(0) {}
  long row;
};

struct EmptyFile : Error {
  using Error::Error;
};

struct NonBinaryLabel : Error {
  using Error::Error;
};

struct DegenerateData : Error {
  using Error::Error;
};

struct EmptyThetaSet : Error {
  using Error::Error;
};

struct EmptySet : Error {
  using Error::Error;
};

}  // namespace kherd
