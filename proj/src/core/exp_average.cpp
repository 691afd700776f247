#include <algorithm>
#include <cmath>

#include "yosida/core.hpp"
#include "yosida/errors.hpp"
#include "yosida/simd.hpp"

namespace yosida {

namespace {

std::size_t kernel_steps(double rate, double h, double tail_eps) {
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw ParameterError("tail_eps must lie in (0, 1)");
  return static_cast<std::size_t>(std::ceil(std::log(1.0 / tail_eps) / (rate * h)));
}

}  // namespace

double exp_average_at(const GridFunction& f, std::size_t c, double rate, double t,
                      double tail_eps) {
  if (!(rate > 0.0)) throw ParameterError("exp_average: rate must be positive");
  const auto& g = f.grid();
  if (!(t <= g.t_max + 1e-9 * g.dt)) throw OutOfRangeError("exp_average: t beyond t_max");

  const double u = (t - g.t_min) / g.dt;
  auto k = static_cast<std::ptrdiff_t>(std::floor(u + 1e-12));
  k = std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(f.size()) - 1);
  const double partial = t - (g.t_min + static_cast<double>(k) * g.dt);

  double acc = 0.0;
  double factor = 1.0;
  if (partial > 1e-12 * g.dt) {
    const auto first = exp_step_weights(rate, partial);
    acc = first.w_far * f.lattice_value(k, c) + first.w_near * f.eval_component(t, c);
    factor = first.decay;
  }
  const auto w = exp_step_weights(rate, g.dt);
  const auto steps = static_cast<std::ptrdiff_t>(kernel_steps(rate, g.dt, tail_eps));
  for (std::ptrdiff_t j = 0; j < steps; ++j) {
    acc += factor * (w.w_near * f.lattice_value(k - j, c) + w.w_far * f.lattice_value(k - j - 1, c));
    factor *= w.decay;
  }
  return acc + factor * f.lattice_value(k - steps, c);
}

void exp_average_nodes(const GridFunction& f, std::size_t c, double rate, double tail_eps,
                       std::span<double> out) {
  if (out.size() != f.size()) throw ParameterError("exp_average_nodes: output size mismatch");
  const auto w = exp_step_weights(rate, f.grid().dt);
  const double c0 = f.extension().kind == LeftExtension::Kind::constant
                        ? f.value(0, c)
                        : exp_average_at(f, c, rate, f.grid().t_min, tail_eps);
  simd::kernels().exp_scan(f.component(c).data(), out.data(), f.size(), c0, w.decay, w.w_far,
                           w.w_near);
}

double exp_average_window(const HistorySegment& phi, std::size_t c, double rate) {
  if (!(rate > 0.0)) throw ParameterError("exp_average: rate must be positive");
  const double h = phi.source().grid().dt;
  const double depth = phi.window().depth;
  double acc = 0.0;
  double factor = 1.0;
  double s = 0.0;
  double near = phi.eval_component(0.0, c);
  while (s < depth) {
    const double step = std::min(h, depth - s);
    if (step <= 1e-12 * h) break;
    const double far = phi.eval_component(-(s + step), c);
    const auto w = exp_step_weights(rate, step);
    acc += factor * (w.w_near * near + w.w_far * far);
    factor *= w.decay;
    near = far;
    s += step;
  }
  return acc + factor * near;
}

}  // namespace yosida
