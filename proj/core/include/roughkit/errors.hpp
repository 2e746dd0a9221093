#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roughkit {

// Bad argument values (non-positive horizon, i >= j, alpha out of range, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operands that cannot be combined: different grids or dimensions.
class IncompatibleOperands : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical scheme produced a non-finite or out-of-bound state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step, double time)
      : std::runtime_error(what), step_(step), time_(time) {}
  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t step_;
  double time_;
};

// A user callback threw; the message carries the time and state at which it
// was evaluated.
class CallbackFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WeightOverflow : public std::runtime_error {
 public:
  WeightOverflow(const std::string& what, std::size_t sample)
      : std::runtime_error(what), sample_(sample) {}
  std::size_t sample() const noexcept { return sample_; }

 private:
  std::size_t sample_;
};

class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Measure interaction outside the closed-form preset registry.
class PresetViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace roughkit
