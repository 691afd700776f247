#include "yosida/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "yosida/errors.hpp"
#include "yosida/simd.hpp"

namespace yosida {

namespace {

constexpr double kTail = 1e-14;

// rate * int_0^inf e^{-rate tau} f(t_i - tau) dtau at every node. Kept
// separate from the solver's convolution: only the per-step weights and the
// scan kernel are shared.
void kernel_average(const GridFunction& f, std::size_t c, double rate, std::span<double> out) {
  const auto& g = f.grid();
  const ExpStepWeights w = exp_step_weights(rate, g.dt);
  double c0 = f.value(0, c);
  if (f.extension().kind == LeftExtension::Kind::periodic) {
    const auto steps = static_cast<std::ptrdiff_t>(std::ceil(std::log(1.0 / kTail) / (rate * g.dt)));
    double acc = 0.0;
    double factor = 1.0;
    for (std::ptrdiff_t j = 0; j < steps; ++j) {
      acc += factor * (w.w_near * f.lattice_value(-j, c) + w.w_far * f.lattice_value(-j - 1, c));
      factor *= w.decay;
    }
    c0 = acc + factor * f.lattice_value(-steps, c);
  }
  simd::kernels().exp_scan(f.component(c).data(), out.data(), f.size(), c0, w.decay, w.w_far, w.w_near);
}

}  // namespace

void VolterraProblem::validate() const {
  if (!(alpha > 0.0) || !(beta > alpha) || !std::isfinite(beta)) {
    throw ParameterError(fmt::format("Volterra problem needs 0 < alpha < beta (alpha={}, beta={})", alpha, beta));
  }
  if (f.size() == 0 || !f.all_finite()) throw ParameterError("Volterra problem needs finite f");
}

GridFunction resolvent_solve(const VolterraProblem& p) {
  p.validate();
  const double rate = p.beta - p.alpha;
  const double scale = p.alpha / rate;
  GridFunction u = p.f;
  std::vector<double> avg(u.size());
  for (std::size_t c = 0; c < u.dim(); ++c) {
    kernel_average(p.f, c, rate, avg);
    auto col = u.component(c);
    for (std::size_t i = 0; i < col.size(); ++i) col[i] += scale * avg[i];
  }
  return u;
}

VolterraPicardResult picard_solve(const VolterraProblem& p, double tol, std::size_t refine) {
  p.validate();
  if (!(tol > 0.0)) throw ParameterError("Picard tolerance must be positive");
  if (refine == 0) throw ParameterError("refine must be at least 1");

  GridSpec fine = p.f.grid();
  fine.dt /= static_cast<double>(refine);
  GridFunction f = refine == 1 ? p.f
                               : GridFunction::sample(
                                     fine, [&](double t) { return p.f.eval(std::min(t, p.f.grid().t_max)); },
                                     p.f.extension());

  const double r = p.alpha / p.beta;
  const double gain = r / (1.0 - r);
  VolterraPicardResult res;
  GridFunction u = f;
  GridFunction next = f;
  std::vector<double> avg(u.size());
  while (true) {
    for (std::size_t c = 0; c < u.dim(); ++c) {
      kernel_average(u, c, p.beta, avg);
      auto dst = next.component(c);
      auto src = f.component(c);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] + r * avg[i];
    }
    res.residual = sup_distance(next, u);
    std::swap(u, next);
    ++res.iterations;
    if (gain * res.residual <= tol) break;
    if (res.iterations > 10000 || !std::isfinite(res.residual)) {
      throw ConvergenceError("Volterra Picard iteration failed to converge", {res.residual});
    }
  }
  res.error_bound = gain * res.residual;
  if (refine == 1) {
    res.u = std::move(u);
  } else {
    res.u = GridFunction(p.f.grid(), p.f.extension());
    for (std::size_t c = 0; c < u.dim(); ++c) {
      auto dst = res.u.component(c);
      auto src = u.component(c);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i * refine];
    }
  }
  return res;
}

GridFunction random_piecewise_linear(const GridSpec& grid, double spacing, std::uint64_t seed,
                                     double lo, double hi) {
  if (!(spacing > 0.0) || !(hi >= lo)) throw ParameterError("random signal needs spacing > 0 and lo <= hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  const auto knots = static_cast<std::size_t>(std::ceil((grid.t_max - grid.t_min) / spacing - 1e-9)) + 1;
  std::vector<double> kt(knots), kx(knots);
  for (std::size_t i = 0; i < knots; ++i) {
    kt[i] = grid.t_min + static_cast<double>(i) * spacing;
    kx[i] = U(rng);
  }
  GridSpec g1 = grid;
  g1.dim = 1;
  return GridFunction::sample_scalar(g1, [&](double t) {
    const double u = (t - grid.t_min) / spacing;
    auto k = static_cast<std::size_t>(std::floor(u));
    k = std::min(k, knots - 2);
    const double f = std::clamp(u - static_cast<double>(k), 0.0, 1.0);
    return (1.0 - f) * kx[k] + f * kx[k + 1];
  });
}

}  // namespace yosida
