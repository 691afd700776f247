#pragma once

// Post-solve diagnostics on a trajectory: the integral-solution inequality,
// boundedness and continuity modulus, Lipschitz estimate, (anti)periodicity
// residuals and a finite-window scan for epsilon-almost periods.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "yosida/operators.hpp"

namespace yosida {

struct IntegralResidualOptions {
  std::size_t n_samples = 200;
  std::uint64_t seed = 1;
  double t_from = 0.0;  ///< sample r, t inside [t_from, t_max]
  double delta_max = 0.5;
  /// Spread of trajectory base points x around u(r).
  double spread = 0.1;
  /// Fixed probe base points; empty: {-1, -0.5, 0, 0.5, 1} * sup|u| per axis.
  std::vector<State> probes;
  /// Tolerance of the solution itself (added to the quadrature allowance).
  double solve_tol = 0.0;
};

struct IntegralResidualReport {
  std::size_t samples = 0;
  std::size_t trajectory_samples = 0;
  std::size_t probe_samples = 0;
  /// max over samples of LHS - RHS, per base-point family.
  double max_violation_trajectory = -std::numeric_limits<double>::infinity();
  double max_violation_probe = -std::numeric_limits<double>::infinity();
  double max_violation() const { return std::max(max_violation_trajectory, max_violation_probe); }
  /// Allowance: 10 dt^2 times the local second-difference bound, plus solve_tol.
  double tol_quad = 0.0;
  std::size_t violations = 0;
};

/// For sampled r <= t and [x, y] in A(r, u_r) + omega I:
///   |u(t) - x| - |u(r) - x| <= int_r^t ([y, u - x]_+ + omega |u - x|) + int_r^t c(v) + |y| int_r^t |g(v) - g(r)|,
/// where the control c pairs each part of h~ = (h, |omega| g, k, u_v) with
/// its own factor:
///   c(v) = L1^omega(|x|) (|h(v) - h(r)| + |omega| |g(v) - g(r)|) + L2(sup|u|) |k(v) - k(r)| + K0 |u_v - u_r|_E.
/// This is never larger than L(|x|) |h~(v) - h~(r)|_1 with L = L1^omega + L2 + K0.
IntegralResidualReport integral_solution_residual(const GridFunction& u, const Operator& op,
                                                  const IntegralResidualOptions& opt);

/// One (r, t, x, y) evaluation of the inequality: returns LHS - RHS.
double integral_inequality_excess(const GridFunction& u, const Operator& op, std::size_t i_r,
                                  std::size_t i_t, const State& x, const State& y);

struct LipschitzEstimate {
  double adjacent = 0.0;  ///< max |u_{i+1} - u_i| / dt
  double pairwise = 0.0;  ///< max over node pairs 2^j steps apart, within the horizon
  double horizon = 0.0;
};

LipschitzEstimate lipschitz_estimate(const GridFunction& u, double t_from, double horizon = 1.0);

/// sup over t in [t_from, t_max - T] of |u(t + T) - u(t)|, exact for the
/// piecewise-linear representative. Needs t_max - t_from >= 2T.
double periodicity_residual(const GridFunction& u, double T, double t_from);
/// Same with |u(t + T) + u(t)|.
double antiperiodicity_residual(const GridFunction& u, double T, double t_from);

struct AlmostPeriodScan {
  std::vector<double> shifts;
  std::vector<double> residuals;
  std::vector<double> hits;
  /// Largest distance between consecutive hits (the scan range if fewer than two).
  double largest_gap = 0.0;
  double epsilon = 0.0;

  void write_csv(std::ostream& os) const;
};

/// Shifts s = -s_max, ..., s_max in steps of ds. Throws ParameterError when
/// s_max exceeds half of [t_from, t_max].
AlmostPeriodScan almost_period_scan(const GridFunction& u, double epsilon, double s_max, double ds,
                                    double t_from, unsigned threads = 1);

/// (delta, sup over |t - t'| = delta of |u(t) - u(t')|) for delta = dt, 2dt,
/// 4dt, ... up to the horizon; values are running maxima so the table is a
/// nondecreasing modulus.
std::vector<std::pair<double, double>> continuity_modulus(const GridFunction& u, double t_from,
                                                          double horizon);

struct QualitativeReport {
  double bound = 0.0;
  std::vector<std::pair<double, double>> modulus;
  LipschitzEstimate lipschitz;
  std::vector<std::pair<double, double>> periodic;      ///< (T, residual)
  std::vector<std::pair<double, double>> antiperiodic;  ///< (T, residual)
  std::optional<AlmostPeriodScan> scan;
  std::optional<IntegralResidualReport> integral;

  void write_text(std::ostream& os) const;
};

}  // namespace yosida
