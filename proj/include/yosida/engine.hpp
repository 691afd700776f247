#pragma once

// The exponential-kernel average (1/lambda) int_0^inf e^{-tau/lambda} u(t - tau) dtau,
// the Yosida derivative built on it, and the Picard solver for
//   u(t) = J_lambda^omega(t, psi_t) ((1/lambda) int_0^inf e^{-tau/lambda} u(t - tau) dtau),
// whose fixed point is T_lambda psi.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "yosida/core.hpp"
#include "yosida/operators.hpp"

namespace yosida {

inline constexpr double kTailEps = 1e-12;

/// Per-step kernel weights for one lambda on one grid.
struct ConvolutionPlan {
  double lambda = 0.0;
  GridSpec grid;
  ExpStepWeights weights;
  std::size_t steps = 0;       ///< kernel cut after this many grid steps
  double tail_depth = 0.0;     ///< steps * dt >= lambda ln(1/tail_eps)
  double tail_weight = 0.0;    ///< kernel mass beyond the cut
  double normalization_residual = 0.0;  ///< |sum of all weights + tail - 1|

  static ConvolutionPlan make(double lambda, const GridSpec& grid, double tail_eps = kTailEps);
};

/// (1/lambda) int_0^inf e^{-tau/lambda} f(t - tau) dtau at one time.
State exp_convolution(const GridFunction& f, double lambda, double t);
/// The same at every node, one sequential scan per component.
GridFunction exp_convolution(const GridFunction& f, double lambda);

/// (f(t) - exp_convolution(f, lambda, t)) / lambda.
State yosida_derivative(const GridFunction& f, double lambda, double t);
GridFunction yosida_derivative(const GridFunction& f, double lambda);

struct PicardOptions {
  double tol = 1e-10;
  /// 0: derived from the contraction factor and the first residual.
  std::size_t iter_max = 0;
  unsigned threads = 1;
  /// Starting iterate; psi itself when null.
  const GridFunction* initial = nullptr;
  /// omega used for the shift; the operator's declared value when NaN.
  double omega = std::numeric_limits<double>::quiet_NaN();
};

struct PicardState {
  GridFunction iterate;
  /// sup |u_k - u_{k-1}| of the last sweep.
  double residual = 0.0;
  /// Bound on sup |u_k - u*| from the contraction factor: q/(1-q) * residual.
  double error_bound = 0.0;
  std::size_t iterations = 0;
  /// Largest residual ratio observed after the second sweep, over residuals
  /// that are still above the roundoff floor. 0 if there were too few.
  double measured_factor = 0.0;
  double q = 1.0;  ///< 1/(1 - lambda omega)
  /// Some residual grew by more than 10% over its predecessor.
  bool nonmonotone = false;
  std::vector<double> trace;
};

/// Jacobi sweeps u <- J^omega(t_i, psi_{t_i})(C[u](t_i)) until
/// q/(1-q) * |u_k - u_{k-1}| <= tol. Throws ConvergenceError (with the
/// residual trace) when iter_max is exhausted. Output does not depend on
/// the thread count.
PicardState solve_T_lambda(const Operator& op, const GridFunction& psi, double lambda,
                           const PicardOptions& opt = {});

struct IterateInequalityReport {
  std::size_t samples = 0;
  std::size_t violations = 0;          ///< pointwise form
  std::size_t running_violations = 0;  ///< running-sup form
  double max_excess = 0.0;             ///< max of LHS - RHS, pointwise form
  double max_running_excess = 0.0;
  double slack = 0.0;  ///< quadrature plus solve tolerance allowance
  double max_lhs = 0.0;

  bool passed() const { return violations == 0 && running_violations == 0; }
};

/// Compares |T psi(t) - T phi(t)| with
///   lambda K0/(1 - lambda omega) D(t) + K0/(1 - lambda omega) int_0^inf e^{omega tau/(1 - lambda omega)} D(t - tau) dtau,
/// D(s) = |psi_s - phi_s|_E, at every node with t >= t_from, and the
/// running-sup form with factor lambda K0/(1 - lambda omega) + K0/(-omega).
IterateInequalityReport verify_iterate_inequality(const Operator& op, const GridFunction& psi,
                                                  const GridFunction& phi, double lambda,
                                                  double t_from, const PicardOptions& opt = {});

struct TheoreticalBounds {
  double outer_ratio = 0.0;   ///< K0 / (-omega)
  double lambda_ratio = 0.0;  ///< K0 lambda/(1 - lambda omega) + K0/(-omega)
  double picard_q = 1.0;      ///< 1/(1 - lambda omega)
};

TheoreticalBounds theoretical_bounds(const OperatorConstants& c, double lambda);

/// |psi_s - phi_s|_E at every node s, exact for the piecewise-linear
/// representatives (the window may reach into the left extension).
std::vector<double> history_gap(const GridFunction& psi, const GridFunction& phi,
                                const HistoryWindow& window);

}  // namespace yosida
