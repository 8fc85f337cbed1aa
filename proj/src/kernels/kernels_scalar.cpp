#include "tmle/kernels.hpp"

#include <cmath>

namespace tmle::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double hellinger_sq_scalar(const double* w, const double* p, const double* q, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    s += w[i] * d * d;
  }
  return s;
}

double sq_diff_scalar(const double* w, const double* p, const double* q, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = p[i] - q[i];
    s += w[i] * d * d;
  }
  return s;
}

double abs_diff_scalar(const double* w, const double* p, const double* q, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * std::fabs(p[i] - q[i]);
  return s;
}

constexpr KernelTable kScalar{Isa::scalar,        dot_scalar,     axpy_scalar,
                              hellinger_sq_scalar, sq_diff_scalar, abs_diff_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace tmle::kernels
