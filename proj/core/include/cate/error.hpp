#pragma once

#include <stdexcept>
#include <string>

namespace cate {

// Base for every error raised by the library. Callers that only need to
// report failures can catch this; the subclasses let the CLI map failures to
// exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad ratios, lambda outside [0, 1], unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A required CSV column is missing.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Data violates a dataset invariant (non-binary treatment, non-finite cell).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// One treatment arm is empty or a propensity model degenerates.
class PositivityError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cate
