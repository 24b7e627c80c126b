#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stablesel {

// A precondition on the caller's input was violated (non-symmetric matrix,
// out-of-range hyperparameter, non-finite value, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Shapes or lengths that do not line up; a contract violation too.
class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double eigen_ratio)
      : std::runtime_error(what), eigen_ratio_(eigen_ratio) {}
  // min eigenvalue / max eigenvalue of the offending matrix.
  double eigen_ratio() const { return eigen_ratio_; }

 private:
  double eigen_ratio_;
};

// An iterative optimizer produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Rejection sampling gave up before collecting enough samples.
class GenerationError : public std::runtime_error {
 public:
  GenerationError(const std::string& what, double acceptance_rate)
      : std::runtime_error(what), acceptance_rate_(acceptance_rate) {}
  double acceptance_rate() const { return acceptance_rate_; }

 private:
  double acceptance_rate_;
};

// An identity that must hold on any valid discrete joint did not. Indicates a
// tolerance or construction bug, never a user error.
class TheoryViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stablesel
