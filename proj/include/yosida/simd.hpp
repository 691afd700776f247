#pragma once

// Data-parallel inner loops used by the solver. Every kernel has a scalar
// reference implementation; an AVX2/FMA variant is selected at runtime when
// the CPU supports it. The two are kept equivalent to a few ulps by the
// kernel tests.

#include <cstddef>
#include <span>
#include <string_view>

namespace yosida::simd {

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;

  /// out[0] = c0; out[i] = decay*out[i-1] + w_far*f[i-1] + w_near*f[i].
  /// The exponential-kernel convolution of a piecewise-linear signal.
  void (*exp_scan)(const double* f, double* out, std::size_t n, double c0,
                   double decay, double w_far, double w_near);

  /// out[i] = (p*z[i] + q[i]) * s[i]
  void (*affine_map)(const double* z, const double* q, const double* s,
                     double p, double* out, std::size_t n);

  /// w = p*z[i] + q[i]; out[i] = sign(w)*max(|w| - thr, 0) * s[i]
  void (*shrink_map)(const double* z, const double* q, const double* s,
                     double p, double thr, double* out, std::size_t n);

  /// max_i |a[i] - b[i]|, 0 for n == 0
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);

  /// acc[i] += (a[i] - b[i])^2
  void (*accumulate_sq_diff)(const double* a, const double* b, double* acc,
                             std::size_t n);

  /// max_i a[i], -inf for n == 0
  double (*max_value)(const double* a, std::size_t n);

  /// max_i |a[i]|, 0 for n == 0
  double (*max_abs)(const double* a, std::size_t n);
};

const KernelTable& scalar_kernels();
#if defined(YOSIDA_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

bool backend_supported(Backend b);

/// Kernels for a specific backend; throws ParameterError if unsupported.
const KernelTable& kernels_for(Backend b);

/// Active table. Defaults to the best supported backend.
const KernelTable& kernels();
Backend active_backend();

/// Overrides the runtime choice (tests, benchmarks). Throws if unsupported.
void set_backend(Backend b);

std::string_view backend_name(Backend b);

}  // namespace yosida::simd
