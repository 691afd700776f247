#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace yosida {

/// Invalid argument or configuration value (lambda out of range, bad grid...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the represented domain of a grid function.
class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// An iterative procedure failed to reach its tolerance. Carries the
/// residual history so callers can report how far it got.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}

  const std::vector<double>& residual_trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// The declared operator constants violate the existence hypotheses
/// (K0 < -omega, or max{K0, L_g} < -omega); no solve is attempted.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent scenario file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace yosida
