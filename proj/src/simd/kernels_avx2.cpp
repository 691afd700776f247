// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "yosida/simd.hpp"

namespace yosida::simd {
namespace {

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

inline __m256d vabs(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// Blocked first-order recurrence: each block of four outputs is an in-register
// prefix scan of the local increments plus the carried value times powers of
// the decay.
void exp_scan(const double* f, double* out, std::size_t n, double c0,
              double decay, double w_far, double w_near) {
  if (n == 0) return;
  out[0] = c0;
  const __m256d vfar = _mm256_set1_pd(w_far);
  const __m256d vnear = _mm256_set1_pd(w_near);
  const __m256d e1 = _mm256_set1_pd(decay);
  const __m256d e2 = _mm256_set1_pd(decay * decay);
  const __m256d epow = _mm256_setr_pd(decay, decay * decay, decay * decay * decay,
                                      decay * decay * decay * decay);
  const __m256d zero = _mm256_setzero_pd();

  __m256d carry = _mm256_set1_pd(c0);
  std::size_t i = 1;
  for (; i + 4 <= n; i += 4) {
    const __m256d fprev = _mm256_loadu_pd(f + i - 1);
    const __m256d fcur = _mm256_loadu_pd(f + i);
    __m256d p = _mm256_fmadd_pd(vfar, fprev, _mm256_mul_pd(vnear, fcur));
    __m256d t = _mm256_blend_pd(_mm256_permute4x64_pd(p, _MM_SHUFFLE(2, 1, 0, 0)),
                                zero, 0b0001);
    p = _mm256_fmadd_pd(e1, t, p);
    t = _mm256_blend_pd(_mm256_permute4x64_pd(p, _MM_SHUFFLE(1, 0, 0, 0)), zero,
                        0b0011);
    p = _mm256_fmadd_pd(e2, t, p);
    const __m256d res = _mm256_fmadd_pd(epow, carry, p);
    _mm256_storeu_pd(out + i, res);
    carry = _mm256_permute4x64_pd(res, _MM_SHUFFLE(3, 3, 3, 3));
  }
  double c = out[i - 1];
  for (; i < n; ++i) {
    c = decay * c + (w_far * f[i - 1] + w_near * f[i]);
    out[i] = c;
  }
}

void affine_map(const double* z, const double* q, const double* s, double p,
                double* out, std::size_t n) {
  const __m256d vp = _mm256_set1_pd(p);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w = _mm256_fmadd_pd(vp, _mm256_loadu_pd(z + i), _mm256_loadu_pd(q + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(w, _mm256_loadu_pd(s + i)));
  }
  for (; i < n; ++i) out[i] = (p * z[i] + q[i]) * s[i];
}

void shrink_map(const double* z, const double* q, const double* s, double p,
                double thr, double* out, std::size_t n) {
  const __m256d vp = _mm256_set1_pd(p);
  const __m256d vthr = _mm256_set1_pd(thr);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w = _mm256_fmadd_pd(vp, _mm256_loadu_pd(z + i), _mm256_loadu_pd(q + i));
    const __m256d mag = _mm256_max_pd(_mm256_sub_pd(vabs(w), vthr), zero);
    const __m256d signed_mag = _mm256_or_pd(mag, _mm256_and_pd(w, sign_mask));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(signed_mag, _mm256_loadu_pd(s + i)));
  }
  for (; i < n; ++i) {
    const double w = p * z[i] + q[i];
    out[i] = std::copysign(std::max(std::fabs(w) - thr, 0.0), w) * s[i];
  }
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    m = _mm256_max_pd(m, vabs(d));
  }
  double r = hmax(m);
  for (; i < n; ++i) r = std::max(r, std::fabs(a[i] - b[i]));
  return r;
}

void accumulate_sq_diff(const double* a, const double* b, double* acc,
                        std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(d, d, _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc[i] += d * d;
  }
}

double max_value(const double* a, std::size_t n) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  __m256d m = _mm256_set1_pd(neg_inf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_loadu_pd(a + i));
  double r = hmax(m);
  for (; i < n; ++i) r = std::max(r, a[i]);
  return r;
}

double max_abs(const double* a, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, vabs(_mm256_loadu_pd(a + i)));
  double r = hmax(m);
  for (; i < n; ++i) r = std::max(r, std::fabs(a[i]));
  return r;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Backend::avx2, exp_scan,    affine_map,
                                 shrink_map,    max_abs_diff, accumulate_sq_diff,
                                 max_value,     max_abs};
  return table;
}

}  // namespace yosida::simd
