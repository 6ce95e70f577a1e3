#pragma once

// Data-parallel inner loops used throughout the library: dot products,
// squared Euclidean distances and axpy updates. Each kernel has a portable
// scalar reference and, where the build target allows it, an AVX2+FMA (x86-64)
// or NEON (aarch64) variant. The variant is chosen once at first use from the
// CPU feature flags; LESS_SIMD=scalar|avx2|neon in the environment overrides
// the choice. All variants are deterministic for a given input length, so a
// given backend produces bitwise-reproducible results regardless of threading.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace less::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

// Scalar reference kernels, always available.
const KernelTable& scalar_kernels();

// Every backend compiled in and supported by the running CPU.
std::vector<Backend> available_backends();
const KernelTable& kernels_for(Backend backend);

// Active table. Selected once; set_backend() changes it process-wide and is
// meant for tests and benchmarks, not for use while fits are running.
const KernelTable& active();
void set_backend(Backend backend);

std::string_view backend_name(Backend backend);
Backend parse_backend(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace less::simd
