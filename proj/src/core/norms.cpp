#include <algorithm>
#include <cassert>
#include <cmath>

#include "yosida/core.hpp"
#include "yosida/errors.hpp"

namespace yosida {

double norm(std::span<const double> x, NormKind kind) {
  if (kind == NormKind::max) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    return m;
  }
  if (x.size() == 1) return std::fabs(x[0]);
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b, NormKind kind) {
  assert(a.size() == b.size());
  if (kind == NormKind::max) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
  }
  if (a.size() == 1) return std::fabs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double upper_bracket(std::span<const double> y, std::span<const double> x, NormKind kind) {
  if (y.size() != x.size()) throw ParameterError("upper_bracket: dimension mismatch");
  const double nx = norm(x, kind);
  if (nx == 0.0) return norm(y, kind);

  if (kind == NormKind::euclidean) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += y[i] * x[i];
    return dot / nx;
  }
  // Max norm: the derivative picks the best direction among the active
  // coordinates.
  double best = -INFINITY;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::fabs(x[i]) == nx) best = std::max(best, std::copysign(1.0, x[i]) * y[i]);
  }
  return best;
}

ExpStepWeights exp_step_weights(double rate, double h) {
  if (!(rate > 0.0) || !(h >= 0.0)) throw ParameterError("exp_step_weights: need rate > 0, h >= 0");
  const double x = rate * h;
  ExpStepWeights w;
  w.decay = std::exp(-x);
  const double mass = -std::expm1(-x);
  if (x < 1e-3) {
    // (1 - e^{-x} - x e^{-x}) / x = sum_k (-1)^{k+1} k x^k / (k+1)!
    double term = x;
    double fact = 2.0;
    double sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
      sum += ((k % 2) ? 1.0 : -1.0) * k * term / fact;
      term *= x;
      fact *= (k + 2);
    }
    w.w_far = sum;
  } else {
    w.w_far = (mass - x * w.decay) / x;
  }
  w.w_near = mass - w.w_far;
  return w;
}

}  // namespace yosida
