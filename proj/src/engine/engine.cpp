#include "yosida/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <fmt/format.h>

#include "../common/parallel.hpp"
#include "yosida/errors.hpp"

namespace yosida {

namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError(fmt::format("lambda must be positive, got {}", lambda));
  }
}

void convolve_into(const GridFunction& f, double lambda, GridFunction& out) {
  for (std::size_t c = 0; c < f.dim(); ++c) {
    exp_average_nodes(f, c, 1.0 / lambda, kTailEps, out.component(c));
  }
}

}  // namespace

ConvolutionPlan ConvolutionPlan::make(double lambda, const GridSpec& grid, double tail_eps) {
  require_lambda(lambda);
  grid.validate();
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw ParameterError("tail_eps must lie in (0, 1)");
  ConvolutionPlan p;
  p.lambda = lambda;
  p.grid = grid;
  p.weights = exp_step_weights(1.0 / lambda, grid.dt);
  p.steps = static_cast<std::size_t>(std::ceil(lambda * std::log(1.0 / tail_eps) / grid.dt));
  p.tail_depth = static_cast<double>(p.steps) * grid.dt;
  // Sum the per-step masses the way the direct evaluation does.
  double mass = 0.0;
  double factor = 1.0;
  for (std::size_t j = 0; j < p.steps; ++j) {
    mass += factor * (p.weights.w_far + p.weights.w_near);
    factor *= p.weights.decay;
  }
  p.tail_weight = factor;
  p.normalization_residual = std::fabs(mass + factor - 1.0);
  return p;
}

State exp_convolution(const GridFunction& f, double lambda, double t) {
  require_lambda(lambda);
  State out(f.dim());
  for (std::size_t c = 0; c < f.dim(); ++c) out[c] = exp_average_at(f, c, 1.0 / lambda, t, kTailEps);
  return out;
}

GridFunction exp_convolution(const GridFunction& f, double lambda) {
  require_lambda(lambda);
  GridFunction out(f.grid(), f.extension());
  convolve_into(f, lambda, out);
  return out;
}

State yosida_derivative(const GridFunction& f, double lambda, double t) {
  State c = exp_convolution(f, lambda, t);
  const State v = f.eval(t);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = (v[i] - c[i]) / lambda;
  return c;
}

GridFunction yosida_derivative(const GridFunction& f, double lambda) {
  GridFunction d = f - exp_convolution(f, lambda);
  d *= 1.0 / lambda;
  return d;
}

PicardState solve_T_lambda(const Operator& op, const GridFunction& psi, double lambda,
                           const PicardOptions& opt) {
  require_lambda(lambda);
  if (psi.dim() != op.dim()) throw ParameterError("solve: history dimension mismatch");
  if (!psi.all_finite()) throw ParameterError("solve: history has non-finite values");
  const double omega = std::isnan(opt.omega) ? op.constants().omega : opt.omega;
  const double shift = 1.0 - lambda * omega;
  if (!(shift > 0.0)) {
    throw ParameterError(fmt::format("solve: need 1 - lambda*omega > 0 (lambda={}, omega={})", lambda, omega));
  }
  if (!(opt.tol > 0.0)) throw ParameterError("solve: tolerance must be positive");

  PicardState st;
  st.q = 1.0 / shift;
  const double q = st.q;
  const double gain = q < 1.0 ? q / (1.0 - q) : std::numeric_limits<double>::infinity();

  const auto bound = op.bind(psi, lambda, omega);
  GridFunction u = opt.initial ? *opt.initial : psi;
  if (!(u.grid() == psi.grid())) throw ParameterError("solve: initial iterate grid mismatch");
  u.set_extension(psi.extension());
  GridFunction conv(psi.grid(), psi.extension());
  GridFunction next(psi.grid(), psi.extension());

  std::size_t iter_max = opt.iter_max;
  for (std::size_t k = 1;; ++k) {
    convolve_into(u, lambda, conv);
    detail::parallel_for(u.size(), opt.threads,
                         [&](std::size_t b, std::size_t e) { bound->apply(conv, next, b, e); });
    const double r = sup_distance(next, u);
    std::swap(u, next);
    st.trace.push_back(r);
    st.iterations = k;
    st.residual = r;

    if (!std::isfinite(r)) {
      throw ConvergenceError(fmt::format("Picard iteration diverged at sweep {} (lambda={})", k, lambda),
                             st.trace);
    }
    if (k >= 2) {
      const double prev = st.trace[k - 2];
      const double floor = 1e-13 * (1.0 + u.sup_norm());
      if (r > 1.1 * prev && prev > floor) st.nonmonotone = true;
      if (k >= 3 && prev > floor) st.measured_factor = std::max(st.measured_factor, r / prev);
    }
    if (gain * r <= opt.tol) break;
    if (iter_max == 0) {
      // Sweeps needed for q^k * r1 * q/(1-q) to reach tol, plus margin.
      const double need = std::log(opt.tol / (gain * r)) / std::log(q);
      iter_max = static_cast<std::size_t>(std::ceil(std::max(0.0, need))) + 20;
    }
    if (k >= iter_max) {
      throw ConvergenceError(
          fmt::format("Picard iteration stalled: residual {:.3e} after {} sweeps (lambda={}, q={:.6f})", r,
                      k, lambda, q),
          st.trace);
    }
  }
  st.error_bound = gain * st.residual;
  st.iterate = std::move(u);
  return st;
}

std::vector<double> history_gap(const GridFunction& psi, const GridFunction& phi,
                                const HistoryWindow& window) {
  if (!(psi.grid() == phi.grid())) throw ParameterError("history_gap: grid mismatch");
  const auto& g = psi.grid();
  const std::size_t n = psi.size();
  const double steps = window.depth / g.dt;
  const auto K = static_cast<std::ptrdiff_t>(std::floor(steps + 1e-9));
  const double frac = std::max(0.0, steps - static_cast<double>(K));
  const bool partial = frac > 1e-9;
  const std::ptrdiff_t lead = K + 1;  // lattice offset of d[0]

  // Difference vectors on the lattice from j = -K-1 to n-1.
  const std::size_t m = n + static_cast<std::size_t>(lead);
  std::vector<double> diff(m * psi.dim());
  std::vector<double> d(m);
  State tmp(psi.dim());
  for (std::size_t s = 0; s < m; ++s) {
    const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(s) - lead;
    for (std::size_t c = 0; c < psi.dim(); ++c) {
      tmp[c] = psi.lattice_value(j, c) - phi.lattice_value(j, c);
      diff[s * psi.dim() + c] = tmp[c];
    }
    d[s] = norm(tmp, g.norm);
  }

  std::vector<double> out(n);
  std::deque<std::size_t> dq;  // indices into d with decreasing values
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = i + static_cast<std::size_t>(lead);
    const std::size_t lo = hi - static_cast<std::size_t>(K);
    if (i == 0) {
      for (std::size_t s = lo; s <= hi; ++s) {
        while (!dq.empty() && d[dq.back()] <= d[s]) dq.pop_back();
        dq.push_back(s);
      }
    } else {
      while (!dq.empty() && d[dq.back()] <= d[hi]) dq.pop_back();
      dq.push_back(hi);
    }
    while (dq.front() < lo) dq.pop_front();
    double v = d[dq.front()];
    if (partial) {
      // Window starts inside the lattice step (lo - 1, lo).
      for (std::size_t c = 0; c < psi.dim(); ++c) {
        tmp[c] = frac * diff[(lo - 1) * psi.dim() + c] + (1.0 - frac) * diff[lo * psi.dim() + c];
      }
      v = std::max(v, norm(tmp, g.norm));
    }
    out[i] = v;
  }
  return out;
}

IterateInequalityReport verify_iterate_inequality(const Operator& op, const GridFunction& psi,
                                                  const GridFunction& phi, double lambda,
                                                  double t_from, const PicardOptions& opt) {
  const auto& k = op.constants();
  const double omega = std::isnan(opt.omega) ? k.omega : opt.omega;
  if (!(omega < 0.0)) throw ParameterError("iterate inequality needs omega < 0");
  const PicardState su = solve_T_lambda(op, psi, lambda, opt);
  const PicardState sv = solve_T_lambda(op, phi, lambda, opt);

  const std::vector<double> D = history_gap(psi, phi, k.window);
  GridSpec g1 = psi.grid();
  g1.dim = 1;
  GridFunction Dg(g1, psi.extension());
  std::ranges::copy(D, Dg.component(0).begin());
  const double shift = 1.0 - lambda * omega;
  const double rho = -omega / shift;
  std::vector<double> avg(D.size());
  exp_average_nodes(Dg, 0, rho, kTailEps, avg);

  double jump = 0.0;
  for (std::size_t i = 1; i < D.size(); ++i) jump = std::max(jump, std::fabs(D[i] - D[i - 1]));

  IterateInequalityReport r;
  const double a = lambda * k.K0 / shift;
  const double b = k.K0 / -omega;
  // Solve errors of both iterates, plus the interpolation error of D inside
  // the kernel average (at most one adjacent-node jump).
  r.slack = su.error_bound + sv.error_bound + b * jump + 1e-12;

  const std::size_t first = psi.grid().first_node_at_or_after(t_from);
  double run_lhs = 0.0;
  double run_D = 0.0;
  r.max_excess = -std::numeric_limits<double>::infinity();
  r.max_running_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < D.size(); ++i) {
    const double lhs = distance(su.iterate.node(i), sv.iterate.node(i), psi.grid().norm);
    run_lhs = std::max(run_lhs, lhs);
    run_D = std::max(run_D, D[i]);
    if (i < first) continue;
    ++r.samples;
    r.max_lhs = std::max(r.max_lhs, lhs);
    const double excess = lhs - (a * D[i] + b * avg[i]);
    const double run_excess = run_lhs - (a + b) * run_D;
    r.max_excess = std::max(r.max_excess, excess);
    r.max_running_excess = std::max(r.max_running_excess, run_excess);
    if (excess > r.slack) ++r.violations;
    if (run_excess > r.slack) ++r.running_violations;
  }
  return r;
}

TheoreticalBounds theoretical_bounds(const OperatorConstants& c, double lambda) {
  require_lambda(lambda);
  if (!(c.omega < 0.0)) throw ParameterError("theoretical bounds need omega < 0");
  TheoreticalBounds b;
  const double shift = 1.0 - lambda * c.omega;
  b.outer_ratio = c.K0 / -c.omega;
  b.lambda_ratio = c.K0 * lambda / shift + b.outer_ratio;
  b.picard_q = 1.0 / shift;
  return b;
}

}  // namespace yosida
