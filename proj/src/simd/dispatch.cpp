#include <atomic>

#include "yosida/errors.hpp"
#include "yosida/simd.hpp"

namespace yosida::simd {
namespace {

bool cpu_has_avx2() {
#if defined(YOSIDA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend best_backend() { return cpu_has_avx2() ? Backend::avx2 : Backend::scalar; }

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&kernels_for(best_backend())};
  return slot;
}

}  // namespace

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels_for(Backend b) {
  if (!backend_supported(b)) {
    throw ParameterError("SIMD backend '" + std::string(backend_name(b)) +
                         "' is not supported on this CPU/build");
  }
#if defined(YOSIDA_HAVE_AVX2)
  if (b == Backend::avx2) return avx2_kernels();
#endif
  return scalar_kernels();
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_acquire); }

Backend active_backend() { return kernels().backend; }

void set_backend(Backend b) { active_slot().store(&kernels_for(b), std::memory_order_release); }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace yosida::simd
