#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels.hpp"
#include "less/errors.hpp"
#include "less/simd.hpp"

namespace less::simd {

namespace {

constexpr KernelTable kScalar{Backend::scalar, detail::dot_scalar, detail::squared_distance_scalar,
                              detail::axpy_scalar};
#if defined(LESS_HAVE_AVX2)
constexpr KernelTable kAvx2{Backend::avx2, detail::dot_avx2, detail::squared_distance_avx2,
                            detail::axpy_avx2};
#endif
#if defined(LESS_HAVE_NEON)
constexpr KernelTable kNeon{Backend::neon, detail::dot_neon, detail::squared_distance_neon,
                            detail::axpy_neon};
#endif

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(LESS_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(LESS_HAVE_NEON)
      return true;  // Advanced SIMD is mandatory on aarch64.
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* select_default() {
  if (const char* env = std::getenv("LESS_SIMD"); env != nullptr && *env != '\0') {
    const Backend wanted = parse_backend(env);
    if (!cpu_supports(wanted)) {
      throw ConfigError("LESS_SIMD=" + std::string(env) + " is not supported on this CPU/build");
    }
    return &kernels_for(wanted);
  }
  const auto backends = available_backends();
  return &kernels_for(backends.back());
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::scalar};
  for (Backend b : {Backend::avx2, Backend::neon}) {
    if (cpu_supports(b)) out.push_back(b);
  }
  return out;
}

const KernelTable& kernels_for(Backend backend) {
  if (!cpu_supports(backend)) {
    throw ConfigError("SIMD backend '" + std::string(backend_name(backend)) + "' unavailable");
  }
  switch (backend) {
#if defined(LESS_HAVE_AVX2)
    case Backend::avx2:
      return kAvx2;
#endif
#if defined(LESS_HAVE_NEON)
    case Backend::neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend backend) { current().store(&kernels_for(backend), std::memory_order_release); }

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  if (name == "neon") return Backend::neon;
  throw ConfigError("unknown SIMD backend '" + std::string(name) + "'");
}

}  // namespace less::simd
