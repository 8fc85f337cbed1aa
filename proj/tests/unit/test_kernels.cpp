#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tmle/kernels.hpp"

using namespace tmle::kernels;

namespace {

struct Data {
  std::vector<double> w, p, q;
};

Data make(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Data d{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    d.w[i] = u(rng) / double(n);
    d.p[i] = u(rng);
    d.q[i] = u(rng);
  }
  return d;
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("scalar kernels on hand values") {
  const KernelTable& s = scalar_table();
  const double a[3] = {1.0, 2.0, 3.0};
  const double b[3] = {4.0, 5.0, 6.0};
  CHECK(s.dot(a, b, 3) == 32.0);
  double y[3] = {1.0, 1.0, 1.0};
  s.axpy(2.0, a, y, 3);
  CHECK(y[2] == 7.0);
  const double w[2] = {0.5, 0.5};
  const double p[2] = {1.0, 4.0};
  const double q[2] = {4.0, 1.0};
  CHECK(s.hellinger_sq(w, p, q, 2) == 1.0);
  CHECK(s.sq_diff(w, p, q, 2) == 9.0);
  CHECK(s.abs_diff(w, p, q, 2) == 3.0);
  CHECK(s.dot(a, b, 0) == 0.0);
}

TEST_CASE("active table is consistent with the CPU") {
  const KernelTable& t = active();
  if (t.isa == Isa::avx2) CHECK(cpu_has_avx2());
  CHECK(!isa_name(t.isa).empty());
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const KernelTable* v = avx2_table();
  if (v == nullptr || !cpu_has_avx2()) {
    MESSAGE("AVX2 variant unavailable; skipping");
    return;
  }
  const KernelTable& s = scalar_table();
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 100u, 1023u, 4096u}) {
    const Data d = make(n, 100 + n);
    CHECK(rel(v->dot(d.p.data(), d.q.data(), n), s.dot(d.p.data(), d.q.data(), n)) <= 1e-13);
    CHECK(rel(v->hellinger_sq(d.w.data(), d.p.data(), d.q.data(), n), s.hellinger_sq(d.w.data(), d.p.data(), d.q.data(), n)) <= 1e-13);
    CHECK(rel(v->sq_diff(d.w.data(), d.p.data(), d.q.data(), n), s.sq_diff(d.w.data(), d.p.data(), d.q.data(), n)) <= 1e-13);
    CHECK(rel(v->abs_diff(d.w.data(), d.p.data(), d.q.data(), n), s.abs_diff(d.w.data(), d.p.data(), d.q.data(), n)) <= 1e-13);
    std::vector<double> y1 = d.q;
    std::vector<double> y2 = d.q;
    v->axpy(0.37, d.p.data(), y1.data(), n);
    s.axpy(0.37, d.p.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(y1[i] - y2[i]) <= 1e-15 * std::fabs(y2[i]) + 1e-300);
  }
}
