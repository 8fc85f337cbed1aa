#pragma once

// Data-parallel inner loops used by quadrature, the rational map machinery and
// the density metrics. Every kernel has a scalar reference implementation and,
// on x86-64, an AVX2/FMA variant; the variant is picked once at runtime.
//
// Set TMLE_SIMD=scalar in the environment to force the reference kernels.

#include <cstddef>
#include <span>
#include <string_view>

namespace tmle::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum_i w[i] * (sqrt(p[i]) - sqrt(q[i]))^2
  double (*hellinger_sq)(const double* w, const double* p, const double* q, std::size_t n);
  // sum_i w[i] * (p[i] - q[i])^2
  double (*sq_diff)(const double* w, const double* p, const double* q, std::size_t n);
  // sum_i w[i] * |p[i] - q[i]|
  double (*abs_diff)(const double* w, const double* p, const double* q, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// Returns nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table() noexcept;
bool cpu_has_avx2() noexcept;

// The table selected for this process (cached on first call).
const KernelTable& active() noexcept;
std::string_view isa_name(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace tmle::kernels
