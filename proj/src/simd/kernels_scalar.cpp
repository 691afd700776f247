#include <algorithm>
#include <cmath>
#include <limits>

#include "yosida/simd.hpp"

namespace yosida::simd {
namespace {

void exp_scan(const double* f, double* out, std::size_t n, double c0,
              double decay, double w_far, double w_near) {
  if (n == 0) return;
  double c = c0;
  out[0] = c;
  for (std::size_t i = 1; i < n; ++i) {
    c = decay * c + (w_far * f[i - 1] + w_near * f[i]);
    out[i] = c;
  }
}

void affine_map(const double* z, const double* q, const double* s, double p,
                double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (p * z[i] + q[i]) * s[i];
}

void shrink_map(const double* z, const double* q, const double* s, double p,
                double thr, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double w = p * z[i] + q[i];
    const double mag = std::max(std::fabs(w) - thr, 0.0);
    out[i] = std::copysign(mag, w) * s[i];
  }
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void accumulate_sq_diff(const double* a, const double* b, double* acc,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc[i] += d * d;
  }
}

double max_value(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, a[i]);
  return m;
}

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::scalar, exp_scan,    affine_map,
                                 shrink_map,      max_abs_diff, accumulate_sq_diff,
                                 max_value,       max_abs};
  return table;
}

}  // namespace yosida::simd
