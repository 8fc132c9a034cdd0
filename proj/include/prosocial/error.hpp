#pragma once

#include <stdexcept>
#include <string>

namespace prosocial {

/// Raised when a caller breaks an operation's precondition, e.g. mixing
/// beliefs computed for one incentive regime with parameters for another.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid configuration or out-of-range input values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A statistical routine has no well-defined answer for its input
/// (empty margins, perfect separation, constant outcome).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SeparationError : public DegenerateDataError {
 public:
  using DegenerateDataError::DegenerateDataError;
};

/// A calibration target lies outside the interval of rates the model can
/// produce. Carries that interval.
class UnattainableTargetError : public std::range_error {
 public:
  UnattainableTargetError(const std::string& what, double lo, double hi)
      : std::range_error(what), lo_(lo), hi_(hi) {}

  double attainable_lo() const noexcept { return lo_; }
  double attainable_hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// An iterative solver stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace prosocial
