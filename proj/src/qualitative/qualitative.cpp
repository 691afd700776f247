#include "yosida/qualitative.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "../common/parallel.hpp"
#include "yosida/errors.hpp"

namespace yosida {

namespace {

// Interpolated value inside [t_min, t_max] without going through State.
double value_at(const GridFunction& u, double t, std::size_t c) {
  const auto& g = u.grid();
  const double x = (t - g.t_min) / g.dt;
  auto k = static_cast<std::ptrdiff_t>(std::floor(x));
  k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(u.size()) - 2);
  const double f = x - static_cast<double>(k);
  const auto i = static_cast<std::size_t>(k);
  return (1.0 - f) * u.value(i, c) + f * u.value(i + 1, c);
}

double point_gap(const GridFunction& u, double t, double s, double sign, State& tmp) {
  for (std::size_t c = 0; c < u.dim(); ++c) tmp[c] = value_at(u, t + s, c) + sign * value_at(u, t, c);
  return norm(tmp, u.grid().norm);
}

// sup over t in [a, b] of |u(t + s) + sign u(t)|. Both u(. + s) and u are
// piecewise linear, so the sup sits at a breakpoint of either or at a or b.
double shifted_sup(const GridFunction& u, double s, double a, double b, double sign) {
  const auto& g = u.grid();
  State tmp(u.dim());
  double m = std::max(point_gap(u, a, s, sign, tmp), point_gap(u, b, s, sign, tmp));
  for (std::size_t i = g.first_node_at_or_after(a); i < u.size(); ++i) {
    const double t = g.node_time(i);
    if (t > b) break;
    m = std::max(m, point_gap(u, t, s, sign, tmp));
  }
  for (std::size_t i = g.first_node_at_or_after(a + s); i < u.size(); ++i) {
    const double t = g.node_time(i) - s;
    if (t > b) break;
    if (t >= a) m = std::max(m, point_gap(u, t, s, sign, tmp));
  }
  return m;
}

double period_residual(const GridFunction& u, double T, double t_from, double sign) {
  if (!(T > 0.0)) throw ParameterError("period must be positive");
  const double a = std::max(t_from, u.grid().t_min);
  if (u.grid().t_max - a < 2.0 * T) {
    throw ParameterError(fmt::format("window [{}, {}] is shorter than 2T = {}", a, u.grid().t_max, 2.0 * T));
  }
  return shifted_sup(u, T, a, u.grid().t_max - T, sign);
}

State node_diff(const GridFunction& u, std::ptrdiff_t i, std::ptrdiff_t j) {
  State d(u.dim());
  for (std::size_t c = 0; c < u.dim(); ++c) d[c] = u.lattice_value(i, c) - u.lattice_value(j, c);
  return d;
}

}  // namespace

double integral_inequality_excess(const GridFunction& u, const Operator& op, std::size_t i_r,
                                  std::size_t i_t, const State& x, const State& y) {
  if (i_t < i_r || i_t >= u.size()) throw ParameterError("integral inequality needs r <= t on the grid");
  const auto& g = u.grid();
  const auto& k = op.constants();
  const NormKind nk = g.norm;
  const double w = k.omega;
  const double tr = g.node_time(i_r);

  auto gap = [&](std::size_t i) {
    State d(u.dim());
    for (std::size_t c = 0; c < u.dim(); ++c) d[c] = u.value(i, c) - x[c];
    return d;
  };
  const double lhs = norm(gap(i_t), nk) - norm(gap(i_r), nk);
  if (i_t == i_r) return lhs;

  const double xn = norm(x, nk);
  const double L1w = k.L1(xn) + xn;
  const double L2 = k.L2(u.sup_norm());
  const double yn = norm(y, nk);
  const bool lip = k.kind == AssumptionKind::lipschitz;
  const State h_r = k.h.empty() ? State{} : eval(k.h, tr);
  const State k_r = k.k.empty() ? State{} : eval(k.k, tr);
  const State g_r = (lip && !k.g.empty()) ? eval(k.g, tr) : State{};

  // Window of u_v - u_r on the lattice: max over j in [i_r - K, i_r] of
  // |u_{j+m} - u_j| for the shift m = v - r in steps.
  const auto K = static_cast<std::ptrdiff_t>(std::ceil(k.window.depth / g.dt - 1e-9));

  auto integrand = [&](std::size_t i) {
    const double tv = g.node_time(i);
    const State d = gap(i);
    double f = upper_bracket(y, d, nk) + w * norm(d, nk);
    double dh = h_r.empty() ? 0.0 : distance(eval(k.h, tv), h_r, nk);
    double dg = g_r.empty() ? 0.0 : distance(eval(k.g, tv), g_r, nk);
    double dk = k_r.empty() ? 0.0 : distance(eval(k.k, tv), k_r, nk);
    f += L1w * (dh + std::fabs(w) * dg) + L2 * dk + yn * dg;
    if (k.K0 > 0.0) {
      const auto m = static_cast<std::ptrdiff_t>(i - i_r);
      const auto ir = static_cast<std::ptrdiff_t>(i_r);
      double e = 0.0;
      for (std::ptrdiff_t j = ir - K; j <= ir; ++j) e = std::max(e, norm(node_diff(u, j + m, j), nk));
      f += k.K0 * e;
    }
    return f;
  };

  double integral = 0.0;
  double prev = integrand(i_r);
  for (std::size_t i = i_r + 1; i <= i_t; ++i) {
    const double cur = integrand(i);
    integral += 0.5 * g.dt * (prev + cur);
    prev = cur;
  }
  return lhs - integral;
}

IntegralResidualReport integral_solution_residual(const GridFunction& u, const Operator& op,
                                                  const IntegralResidualOptions& opt) {
  const auto& g = u.grid();
  const auto& k = op.constants();
  const std::size_t first = g.first_node_at_or_after(opt.t_from);
  if (first + 1 >= u.size()) throw ParameterError("integral residual: trimmed window is empty");
  const auto M = static_cast<std::size_t>(std::max(1.0, std::floor(opt.delta_max / g.dt)));

  std::vector<State> probes = opt.probes;
  if (probes.empty()) {
    const double s = std::max(1.0, u.sup_norm(g.node_time(first), g.t_max));
    for (double a : {-1.0, -0.5, 0.0, 0.5, 1.0}) probes.emplace_back(u.dim(), a * s);
  }

  // Second-difference bound on the trimmed window for the quadrature allowance.
  double d2 = 0.0;
  for (std::size_t i = std::max<std::size_t>(first, 1); i + 1 < u.size(); ++i) {
    for (std::size_t c = 0; c < u.dim(); ++c) {
      d2 = std::max(d2, std::fabs(u.value(i + 1, c) - 2.0 * u.value(i, c) + u.value(i - 1, c)) / (g.dt * g.dt));
    }
  }

  IntegralResidualReport rep;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::size_t span = u.size() - 1 - first;
  for (std::size_t n = 0; n < opt.n_samples; ++n) {
    const std::size_t i_r = first + static_cast<std::size_t>(U(rng) * static_cast<double>(span));
    const std::size_t room = std::min(M, u.size() - 1 - i_r);
    const std::size_t i_t = i_r + static_cast<std::size_t>(U(rng) * static_cast<double>(room + 1));
    const bool trajectory = n % 2 == 0;
    State x;
    if (trajectory) {
      x = u.node(i_r);
      for (double& v : x) v += opt.spread * (2.0 * U(rng) - 1.0);
    } else {
      x = probes[static_cast<std::size_t>(U(rng) * static_cast<double>(probes.size())) % probes.size()];
    }
    const double tr = g.node_time(i_r);
    const HistorySegment seg(u, tr, k.window);
    GraphPair p = graph_pair(op, tr, seg, x);
    for (std::size_t c = 0; c < p.y.size(); ++c) p.y[c] += k.omega * p.x[c];
    const double yn = norm(p.y, g.norm);
    const double allowance = 10.0 * g.dt * g.dt * d2 * (1.0 + yn) + opt.solve_tol;
    rep.tol_quad = std::max(rep.tol_quad, allowance);

    const double excess = integral_inequality_excess(u, op, i_r, i_t, p.x, p.y);
    ++rep.samples;
    if (trajectory) {
      ++rep.trajectory_samples;
      rep.max_violation_trajectory = std::max(rep.max_violation_trajectory, excess);
    } else {
      ++rep.probe_samples;
      rep.max_violation_probe = std::max(rep.max_violation_probe, excess);
    }
    if (excess > allowance) ++rep.violations;
  }
  return rep;
}

LipschitzEstimate lipschitz_estimate(const GridFunction& u, double t_from, double horizon) {
  const auto& g = u.grid();
  const std::size_t first = g.first_node_at_or_after(t_from);
  LipschitzEstimate est;
  est.horizon = horizon;
  const auto H = static_cast<std::size_t>(std::max(1.0, std::floor(horizon / g.dt + 1e-9)));
  for (std::size_t i = first; i + 1 < u.size(); ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    est.adjacent = std::max(est.adjacent, norm(node_diff(u, ii + 1, ii), g.norm) / g.dt);
  }
  // Chords of a piecewise-linear path never beat its steepest piece, but
  // the pairwise scan is kept as an independent check of that.
  for (std::size_t i = first; i < u.size(); ++i) {
    for (std::size_t m = 1; m <= H && i + m < u.size(); m *= 2) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const double q = norm(node_diff(u, ii + static_cast<std::ptrdiff_t>(m), ii), g.norm) /
                       (static_cast<double>(m) * g.dt);
      est.pairwise = std::max(est.pairwise, q);
    }
  }
  return est;
}

double periodicity_residual(const GridFunction& u, double T, double t_from) {
  return period_residual(u, T, t_from, -1.0);
}

double antiperiodicity_residual(const GridFunction& u, double T, double t_from) {
  return period_residual(u, T, t_from, 1.0);
}

AlmostPeriodScan almost_period_scan(const GridFunction& u, double epsilon, double s_max, double ds,
                                    double t_from, unsigned threads) {
  if (!(epsilon >= 0.0) || !(ds > 0.0) || !(s_max >= 0.0)) {
    throw ParameterError("scan needs epsilon >= 0, ds > 0, s_max >= 0");
  }
  const double a = std::max(t_from, u.grid().t_min);
  const double b = u.grid().t_max;
  if (s_max > 0.5 * (b - a)) {
    throw ParameterError(fmt::format("s_max = {} exceeds half of the trimmed window ({})", s_max, 0.5 * (b - a)));
  }
  AlmostPeriodScan scan;
  scan.epsilon = epsilon;
  const auto half = static_cast<std::ptrdiff_t>(std::floor(s_max / ds + 1e-9));
  for (std::ptrdiff_t j = -half; j <= half; ++j) scan.shifts.push_back(static_cast<double>(j) * ds);
  scan.residuals.resize(scan.shifts.size());
  detail::parallel_for(
      scan.shifts.size(), threads,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const double s = scan.shifts[i];
          // t and t + s both inside [a, b].
          scan.residuals[i] = shifted_sup(u, s, std::max(a, a - s), std::min(b, b - s), -1.0);
        }
      },
      1);
  for (std::size_t i = 0; i < scan.shifts.size(); ++i) {
    if (scan.residuals[i] <= epsilon) scan.hits.push_back(scan.shifts[i]);
  }
  if (scan.hits.size() < 2) {
    scan.largest_gap = 2.0 * s_max;
  } else {
    for (std::size_t i = 1; i < scan.hits.size(); ++i) {
      scan.largest_gap = std::max(scan.largest_gap, scan.hits[i] - scan.hits[i - 1]);
    }
  }
  return scan;
}

void AlmostPeriodScan::write_csv(std::ostream& os) const {
  os << "s,residual\n";
  for (std::size_t i = 0; i < shifts.size(); ++i) fmt::print(os, "{:.17g},{:.17g}\n", shifts[i], residuals[i]);
}

std::vector<std::pair<double, double>> continuity_modulus(const GridFunction& u, double t_from,
                                                          double horizon) {
  const auto& g = u.grid();
  const std::size_t first = g.first_node_at_or_after(t_from);
  std::vector<std::pair<double, double>> table;
  double running = 0.0;
  for (std::size_t m = 1; static_cast<double>(m) * g.dt <= horizon * (1.0 + 1e-12); m *= 2) {
    double best = 0.0;
    for (std::size_t i = first; i + m < u.size(); ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      best = std::max(best, norm(node_diff(u, ii + static_cast<std::ptrdiff_t>(m), ii), g.norm));
    }
    running = std::max(running, best);
    table.emplace_back(static_cast<double>(m) * g.dt, running);
  }
  return table;
}

void QualitativeReport::write_text(std::ostream& os) const {
  fmt::print(os, "sup |u| (trimmed): {:.6g}\n", bound);
  fmt::print(os, "Lipschitz estimate: adjacent {:.6g}, pairwise {:.6g} (horizon {})\n", lipschitz.adjacent,
             lipschitz.pairwise, lipschitz.horizon);
  fmt::print(os, "continuity modulus (delta, sup variation):\n");
  for (const auto& [d, v] : modulus) fmt::print(os, "  {:.6g} {:.6g}\n", d, v);
  for (const auto& [T, r] : periodic) fmt::print(os, "periodicity residual T={:.6g}: {:.6e}\n", T, r);
  for (const auto& [T, r] : antiperiodic) fmt::print(os, "anti-periodicity residual T={:.6g}: {:.6e}\n", T, r);
  if (scan) {
    fmt::print(os, "almost-period scan: epsilon {}, {} hits of {} shifts, largest gap {:.6g}\n", scan->epsilon,
               scan->hits.size(), scan->shifts.size(), scan->largest_gap);
    fmt::print(os, "  note: a finite-window scan statistic, not a certificate of almost periodicity\n");
  }
  if (integral) {
    fmt::print(os,
               "integral-solution residual: {} samples ({} trajectory, {} probe), max violation "
               "trajectory {:.3e}, probe {:.3e}, allowance {:.3e}, violations {}\n",
               integral->samples, integral->trajectory_samples, integral->probe_samples,
               integral->max_violation_trajectory, integral->max_violation_probe, integral->tol_quad,
               integral->violations);
  }
}

}  // namespace yosida
