#pragma once

// Shared test helpers: seeded generators and oracles that do not reuse the
// library's own recurrences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "yosida/core.hpp"

namespace testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin() { return uniform(0.0, 1.0) < 0.5; }
  std::vector<double> vec(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Random trigonometric polynomial with `terms` modes.
inline std::function<double(double)> random_trig(Gen& g, int terms = 3) {
  std::vector<double> a, w, p;
  for (int k = 0; k < terms; ++k) {
    a.push_back(g.uniform(-1.0, 1.0));
    w.push_back(g.uniform(0.2, 2.0));
    p.push_back(g.uniform(0.0, 6.283185307179586));
  }
  const double c = g.uniform(-1.0, 1.0);
  return [=](double t) {
    double s = c;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::sin(w[k] * t + p[k]);
    return s;
  };
}

/// rate * int_0^depth e^{-rate tau} f(t - tau) dtau by 8-point Gauss-Legendre
/// on each subinterval of length h, plus e^{-rate depth} f(t - depth).
inline double gl_exp_average(const std::function<double(double)>& f, double rate, double t,
                             double depth, double h) {
  static const double x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                              -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                              0.7966664774136267,  0.9602898564975363};
  static const double w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                              0.2223810344533745, 0.1012285362903763};
  const auto n = static_cast<long>(std::ceil(depth / h - 1e-9));
  double sum = 0.0;
  for (long k = 0; k < n; ++k) {
    const double a = static_cast<double>(k) * h;
    const double b = std::min(depth, a + h);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int j = 0; j < 8; ++j) {
      const double tau = mid + half * x[j];
      sum += w[j] * half * rate * std::exp(-rate * tau) * f(t - tau);
    }
  }
  return sum + std::exp(-rate * depth) * f(t - depth);
}

}  // namespace testing
