#pragma once

// Data-parallel inner loops used by the numeric core. Every kernel has a
// scalar reference implementation; vector variants are selected once at
// startup from what the CPU reports, and can be forced with WIC_SIMD
// (scalar | avx2 | neon | auto).

#include <cstddef>
#include <string_view>

namespace wic::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  Backend backend;
  float (*dot_f32)(const float* a, const float* b, std::size_t n);
  double (*dot_f64)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy_f32)(float alpha, const float* x, float* y, std::size_t n);
  void (*axpy_f64)(double alpha, const double* x, double* y, std::size_t n);
};

std::string_view backend_name(Backend b);

bool backend_available(Backend b);

// Table for a specific backend; throws ConfigError when unavailable.
const KernelTable& kernels_for(Backend b);

// Currently active table.
const KernelTable& kernels();

// Overrides the active backend (tests, CLI). Not meant to be called while
// other threads are running kernels.
void set_backend(Backend b);

Backend active_backend();

template <class T>
inline T dot(const T* a, const T* b, std::size_t n) {
  if constexpr (sizeof(T) == 4) {
    return kernels().dot_f32(a, b, n);
  } else {
    return kernels().dot_f64(a, b, n);
  }
}

template <class T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
  if constexpr (sizeof(T) == 4) {
    kernels().axpy_f32(alpha, x, y, n);
  } else {
    kernels().axpy_f64(alpha, x, y, n);
  }
}

namespace detail {
float dot_f32_scalar(const float*, const float*, std::size_t);
double dot_f64_scalar(const double*, const double*, std::size_t);
void axpy_f32_scalar(float, const float*, float*, std::size_t);
void axpy_f64_scalar(double, const double*, double*, std::size_t);

float dot_f32_avx2(const float*, const float*, std::size_t);
double dot_f64_avx2(const double*, const double*, std::size_t);
void axpy_f32_avx2(float, const float*, float*, std::size_t);
void axpy_f64_avx2(double, const double*, double*, std::size_t);

float dot_f32_neon(const float*, const float*, std::size_t);
double dot_f64_neon(const double*, const double*, std::size_t);
void axpy_f32_neon(float, const float*, float*, std::size_t);
void axpy_f64_neon(double, const double*, double*, std::size_t);
}  // namespace detail

}  // namespace wic::simd
