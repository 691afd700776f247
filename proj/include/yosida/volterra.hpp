#pragma once

// u(t) = f(t) + alpha int_0^inf e^{-beta tau} u(t - tau) dtau, 0 < alpha < beta,
// solved two independent ways: through the explicit positive resolvent
//   u = f + alpha int_0^inf e^{-(beta - alpha) tau} f(t - tau) dtau
// and by direct fixed-point iteration (contraction factor alpha/beta).

#include <cstddef>
#include <cstdint>

#include "yosida/core.hpp"

namespace yosida {

struct VolterraProblem {
  GridFunction f;
  double alpha = 1.0;
  double beta = 2.0;

  /// Throws ParameterError unless 0 < alpha < beta and f is finite.
  void validate() const;
};

GridFunction resolvent_solve(const VolterraProblem& p);

struct VolterraPicardResult {
  GridFunction u;
  std::size_t iterations = 0;
  double residual = 0.0;     ///< last sup |u_k - u_{k-1}|
  double error_bound = 0.0;  ///< r/(1-r) * residual, r = alpha/beta
};

/// Fixed-point iteration to error bound <= tol. With refine > 1 the
/// iteration runs on a grid refine times finer (f interpolated, which is
/// exact for its piecewise-linear representative) and is sampled back.
VolterraPicardResult picard_solve(const VolterraProblem& p, double tol, std::size_t refine = 1);

/// Piecewise-linear signal with knots every `spacing` from t_min and knot
/// values drawn uniformly from [lo, hi]; sampled on the grid.
GridFunction random_piecewise_linear(const GridSpec& grid, double spacing, std::uint64_t seed,
                                     double lo = 0.0, double hi = 1.0);

}  // namespace yosida
