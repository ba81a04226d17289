#pragma once

#include <stdexcept>
#include <string>

namespace nprsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or a broken type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Integration step too coarse to resolve the resonance.
class UnstableStepError : public Error {
 public:
  using Error::Error;
};

class NonFiniteInputError : public Error {
 public:
  using Error::Error;
};

/// Frequency sweep found no interior response peak.
class NoResonanceError : public Error {
 public:
  using Error::Error;
};

class NyquistError : public Error {
 public:
  using Error::Error;
};

class SampleRateMismatchError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class ClippingError : public Error {
 public:
  using Error::Error;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

class WavError : public Error {
 public:
  using Error::Error;
};

/// Scenario or archetype file problem. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace nprsim
