#pragma once

// Outer recursion u_{n+1} = lim_lambda T_lambda(u_n): every outer step
// solves T_lambda for the whole lambda schedule with histories drawn from
// the previous outer iterate, and the smallest-lambda solve stands in for
// the limit.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "yosida/engine.hpp"
#include "yosida/errors.hpp"

namespace yosida {

struct SolverConfig {
  GridSpec grid;
  LeftExtension extension;
  std::vector<double> lambda_schedule{0.2, 0.1, 0.05, 0.025, 0.0125};
  std::size_t n_max = 40;
  /// Stop when sup |u_{n+1} - u_n| <= tol_outer. Unset: 1e-6 (1 + sup |u_1|).
  std::optional<double> tol_outer;
  double tol_picard = 1e-10;
  /// Prefix [t_min, t_min + burn_in) excluded from reported diagnostics.
  double burn_in = 10.0;
  std::uint64_t seed = 1;
  /// Start each T_lambda solve from the previous outer step's solve at the
  /// same lambda instead of from the history u_{n-1}.
  bool warm_start = false;
  unsigned threads = 1;
  /// Refuse operators that violate the existence hypotheses.
  bool enforce_gate = true;

  /// Schedule strictly decreasing and inside (0, 1/|omega|); grid valid;
  /// burn-in shorter than the grid. Throws ParameterError.
  void validate(const OperatorConstants& c) const;
  double trim_start() const { return grid.t_min + burn_in; }
  double lambda_min() const { return lambda_schedule.back(); }
};

/// One outer step n (u_n computed from u_{n-1}).
struct OuterStep {
  std::size_t n = 0;
  /// sup |u_n - u_{n-1}| over the grid, smallest-lambda surrogates.
  double diff = 0.0;
  /// diff_n / diff_{n-1}; 0 for n = 1.
  double ratio = 0.0;
  /// sup |u_{n,lambda_i} - u_{n,lambda_{i+1}}| down the schedule.
  std::vector<double> lambda_cauchy;
  std::vector<std::size_t> picard_iterations;
  std::vector<double> picard_factor;
  std::vector<bool> picard_nonmonotone;
  double seconds = 0.0;
};

struct LambdaCauchyTable {
  std::size_t n = 1;
  std::vector<double> lambdas;
  std::vector<double> diffs;  ///< diffs[i] = |u_{n,lambdas[i]} - u_{n,lambdas[i+1]}|
  bool monotone = true;
};

struct ConvergenceReport {
  std::string operator_name;
  TheoreticalBounds bounds;  ///< at lambda_min
  double tol_outer = 0.0;
  std::vector<double> lambda_schedule;
  std::vector<OuterStep> steps;
  bool converged = false;
  /// Outer step at which the tolerance was met.
  std::size_t converged_index = 0;
  /// Largest diff ratio over n >= 2 (0 when fewer than two ratios exist).
  double measured_outer_ratio = 0.0;
  /// Some measured ratio exceeds the theoretical one by more than 0.05.
  bool ratio_flag = false;
  /// Richardson value 2 u_{lambda_min} - u_{2 lambda_min}: its sup distance
  /// to the surrogate on the trimmed window (0 when 2 lambda_min is not in
  /// the schedule).
  double richardson_shift = 0.0;
  double final_sup = 0.0;
  double seconds = 0.0;
  std::vector<std::string> notes;

  void write_text(std::ostream& os) const;
  /// `key = value` lines.
  void write_kv(std::ostream& os) const;
};

/// Outer tolerance not met within n_max; carries the partial report.
class OuterConvergenceError : public ConvergenceError {
 public:
  OuterConvergenceError(const std::string& what, std::vector<double> trace, ConvergenceReport report)
      : ConvergenceError(what, std::move(trace)), report_(std::move(report)) {}
  const ConvergenceReport& report() const noexcept { return report_; }

 private:
  ConvergenceReport report_;
};

struct RecursionResult {
  GridFunction solution;       ///< smallest-lambda surrogate of the limit
  GridFunction extrapolated;   ///< Richardson value (copy of solution if unavailable)
  GridFunction second;         ///< solve at the second-smallest lambda of the last step
  ConvergenceReport report;
};

/// Throws HypothesisError (gate), ParameterError (config) or
/// ConvergenceError (outer or Picard non-convergence).
RecursionResult run_recursion(const Operator& op, const GridFunction& psi, const SolverConfig& cfg);

/// Lockstep stepper: exposes u_n one outer step at a time.
class OuterRecursion {
 public:
  OuterRecursion(const Operator& op, GridFunction psi, const SolverConfig& cfg);

  /// Computes u_{n+1}; returns its step record.
  const OuterStep& advance();
  const GridFunction& current() const { return current_; }
  const std::vector<GridFunction>& last_solves() const { return solves_; }
  std::size_t n() const { return steps_.size(); }
  const std::vector<OuterStep>& steps() const { return steps_; }

 private:
  const Operator& op_;
  const SolverConfig& cfg_;
  GridFunction current_;
  std::vector<GridFunction> solves_;
  std::vector<OuterStep> steps_;
};

struct StartIndependence {
  double gap = 0.0;           ///< final sup gap (trimmed window)
  std::vector<double> f;      ///< per-n sup gap on the whole grid
  std::vector<double> ratios;
  double bound = 0.0;         ///< K0 lambda/(1 - lambda omega) + K0/(-omega) at lambda_min
  std::size_t bound_violations = 0;
  std::size_t steps = 0;
};

/// Runs the recursion from psi and from phi in lockstep until both meet the
/// outer tolerance (or n_max), and checks f_{n+1} <= bound f_n + slack.
StartIndependence check_start_independence(const Operator& op, const GridFunction& psi,
                                           const GridFunction& phi, const SolverConfig& cfg);

/// The lambda-Cauchy differences at outer step n.
LambdaCauchyTable lambda_cauchy_table(const Operator& op, const GridFunction& psi,
                                      const SolverConfig& cfg, std::size_t n = 1);

/// Gate check: throws HypothesisError with the reason.
void enforce_hypotheses(const Operator& op);

}  // namespace yosida
