#include <atomic>
#include <cstdlib>
#include <string>

#include "wic/simd/kernels.hpp"
#include "wic/util/errors.hpp"

namespace wic::simd {
namespace {

constexpr KernelTable kScalar{Backend::scalar, detail::dot_f32_scalar, detail::dot_f64_scalar,
                              detail::axpy_f32_scalar, detail::axpy_f64_scalar};

#if defined(WIC_HAVE_AVX2)
constexpr KernelTable kAvx2{Backend::avx2, detail::dot_f32_avx2, detail::dot_f64_avx2, detail::axpy_f32_avx2,
                            detail::axpy_f64_avx2};
#endif

#if defined(WIC_HAVE_NEON)
constexpr KernelTable kNeon{Backend::neon, detail::dot_f32_neon, detail::dot_f64_neon, detail::axpy_f32_neon,
                            detail::axpy_f64_neon};
#endif

bool cpu_has_avx2() {
#if defined(WIC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* pick_default() {
  const char* env = std::getenv("WIC_SIMD");
  std::string want = env ? env : "auto";
  if (want == "scalar") return &kScalar;
  if (want == "avx2" && backend_available(Backend::avx2)) return &kernels_for(Backend::avx2);
  if (want == "neon" && backend_available(Backend::neon)) return &kernels_for(Backend::neon);
  if (backend_available(Backend::avx2)) return &kernels_for(Backend::avx2);
  if (backend_available(Backend::neon)) return &kernels_for(Backend::neon);
  return &kScalar;
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: {
      static const bool ok = cpu_has_avx2();
      return ok;
    }
    case Backend::neon:
#if defined(WIC_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Backend b) {
  if (!backend_available(b)) throw ConfigError("SIMD backend not available: " + std::string(backend_name(b)));
  switch (b) {
#if defined(WIC_HAVE_AVX2)
    case Backend::avx2: return kAvx2;
#endif
#if defined(WIC_HAVE_NEON)
    case Backend::neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

void set_backend(Backend b) { active().store(&kernels_for(b), std::memory_order_release); }

Backend active_backend() { return kernels().backend; }

}  // namespace wic::simd
