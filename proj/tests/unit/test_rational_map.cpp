#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tmle/density.hpp"
#include "tmle/error.hpp"
#include "tmle/kr_map.hpp"
#include "tmle/quadrature.hpp"
#include "tmle/rational_map.hpp"

using namespace tmle;

namespace {

std::shared_ptr<const WaveletBasis> basis(WaveletFamily f, std::size_t d, int J) {
  return std::make_shared<const WaveletBasis>(f, d, J);
}

Theta random_theta(std::shared_ptr<const WaveletBasis> b, double scale, std::mt19937_64& rng) {
  Theta t(std::move(b), 2.0);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : t.values()) v = n(rng);
  return t;
}

const LinkFunction kLink = LinkFunction::calibrated(0.25, 4.0);

}  // namespace

TEST_CASE("theta = 0 is the identity at quadrature nodes and elsewhere") {
  for (auto f : {WaveletFamily::haar, WaveletFamily::daubechies4}) {
    const RationalTriangularMap s(Theta(basis(f, 3, 2), 2.0), kLink);
    const TensorGrid g = make_tensor_grid(GridSpec::gauss_legendre(3, 4, 3));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.point(i);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(s.component(k, x) == x[k]);
        CHECK(s.diagonal_partial(k, x) == 1.0);
      }
    }
    const double y[3] = {0.123, 0.777, 0.5};
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::fabs(s.component(k, y) - y[k]) <= 1e-15);
  }
}

TEST_CASE("constant parameter cancels") {
  for (double c : {-3.0, 0.7, 5.0}) {
    const RationalTriangularMap s({[c](std::span<const double>) { return c; }}, kLink);
    for (double x : {0.0, 0.2, 0.5, 0.9, 1.0}) {
      CHECK(std::fabs(s.component(0, std::span<const double>(&x, 1)) - x) <= 1e-14);
    }
  }
}

TEST_CASE("F(x) = x with logistic(1/2, 2): refined-quadrature oracle") {
  const LinkFunction l = LinkFunction::logistic(0.5, 2.0);
  const RationalTriangularMap s({[](std::span<const double> x) { return x[0]; }}, l);
  auto integral = [&](double b) {
    const AxisRule r = composite_gauss_legendre(256, 20, 0.0, b);
    double v = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) v += r.weights[i] * l.phi(r.nodes[i]);
    return v;
  };
  const double oracle = integral(0.5) / integral(1.0);
  const double x = 0.5;
  CHECK(std::fabs(s.component(0, std::span<const double>(&x, 1)) - oracle) <= 1e-8);
}

TEST_CASE("end points are exact") {
  std::mt19937_64 rng(1);
  for (auto f : {WaveletFamily::haar, WaveletFamily::daubechies4}) {
    const RationalTriangularMap s(random_theta(basis(f, 2, 2), 2.0, rng), kLink);
    for (double a : {0.0, 0.31, 1.0}) {
      const double lo[2] = {a, 0.0};
      const double hi[2] = {a, 1.0};
      CHECK(s.component(1, lo) == 0.0);
      CHECK(s.component(1, hi) == 1.0);
    }
    CHECK(s.component(0, std::span<const double>(std::array{1.0}.data(), 1)) == 1.0);
  }
}

TEST_CASE("diagonal partial bounds on 1000 random theta") {
  std::mt19937_64 rng(2);
  const double lo = kLink.k_min() / (2.0 * kLink.k_max());
  const double hi = 2.0 * kLink.k_max() / kLink.k_min();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto b = basis(WaveletFamily::haar, 2, 2);
  double mn = 1e300;
  double mx = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const RationalTriangularMap s(random_theta(b, 3.0, rng), kLink);
    for (int p = 0; p < 5; ++p) {
      const double x[2] = {u(rng), u(rng)};
      for (std::size_t k = 0; k < 2; ++k) {
        const double v = s.diagonal_partial(k, x);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
    }
  }
  CHECK(mn >= lo);
  CHECK(mx <= hi);
}

TEST_CASE("diagonal partial matches central differences (Haar)") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const RationalTriangularMap s(random_theta(basis(WaveletFamily::haar, 2, 2), 0.5, rng), kLink);
  int checked = 0;
  for (int rep = 0; rep < 200 && checked < 50; ++rep) {
    double x[2] = {u(rng), u(rng)};
    // keep away from dyadic kinks of the finest level
    const double cell = x[1] * 8.0;
    if (std::fabs(cell - std::round(cell)) < 1e-3) continue;
    const double h = 1e-5;
    double xp[2] = {x[0], x[1] + h};
    double xm[2] = {x[0], x[1] - h};
    const double fd = (s.component(1, xp) - s.component(1, xm)) / (2.0 * h);
    CHECK(std::fabs(s.diagonal_partial(1, x) - fd) <= 1e-6);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("Daubechies-4: increments of the component integrate the partial") {
  // The cascade functions are only Hoelder continuous: the check is in
  // integral form, and eight Gauss-Legendre nodes per panel resolve the
  // increments to about 1e-3.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RationalTriangularMap s(random_theta(basis(WaveletFamily::daubechies4, 2, 2), 0.5, rng), kLink);
  for (int rep = 0; rep < 8; ++rep) {
    const double x1 = u(rng);
    const double a = 0.9 * u(rng);
    const double b = a + 0.1;
    const AxisRule r = composite_gauss_legendre(2048, 4, a, b);
    double integral = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double x[2] = {x1, r.nodes[i]};
      integral += r.weights[i] * s.diagonal_partial(1, x);
    }
    const double xa[2] = {x1, a};
    const double xb[2] = {x1, b};
    CHECK(std::fabs(s.component(1, xb) - s.component(1, xa) - integral) <= 2e-3);
  }
}

TEST_CASE("theta storage and norms") {
  const auto b = basis(WaveletFamily::haar, 2, 3);
  Theta t(b, 2.0);
  CHECK(b_alpha_norm(t) == 0.0);
  t.at(0, 0, 1) = 1.0;
  CHECK(b_alpha_norm(t) == 1.0);
  Theta u(b, 2.0);
  u.at(1, 2, 5) = 1.0;
  CHECK(b_alpha_norm(u) == doctest::Approx(16.0).epsilon(1e-15));
  CHECK(b_alpha_norm(u, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
  std::mt19937_64 rng(9);
  Theta r = random_theta(b, 1.0, rng);
  const double n = b_alpha_norm(r);
  for (auto& v : r.values()) v *= -3.0;
  CHECK(b_alpha_norm(r) == doctest::Approx(3.0 * n).epsilon(1e-14));
  const auto w = penalty_weights(*b, 2.0);
  CHECK(w[b->flat_index(0, 0, 1)] == 1.0);
  CHECK(w[b->component_offset(1) + b->flat_index(1, 3, 1)] == std::ldexp(1.0, 12));
  CHECK_THROWS_AS(t.at(2, 0, 1), InputError);
}

TEST_CASE("natural parameter: identity gives zero") {
  const auto id = FunctionalTriangularMap::identity(2);
  const auto f = natural_parameter(id, kLink);
  REQUIRE(f.size() == 2);
  const double x[2] = {0.4, 0.9};
  CHECK(std::fabs(f[0](std::span<const double>(x, 1))) <= 1e-14);
  CHECK(std::fabs(f[1](x)) <= 1e-14);
}

TEST_CASE("natural parameter: d=1 linear tilt closed form and round trip") {
  DensitySpec tilt;
  tilt.kind = DensityKind::linear_tilt;
  tilt.tilt = 0.5;
  const auto kr = KrMap::build(make_test_density(tilt, 1), uniform_reference(1));
  const auto f = natural_parameter(kr, kLink);
  for (double x : {0.0, 0.3, 0.8, 1.0}) {
    CHECK(std::fabs(f[0](std::span<const double>(&x, 1)) - kLink.phi_inverse(x + 0.5)) <= 1e-10);
  }
  const RationalTriangularMap s(f, kLink);
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = i / 200.0;
    worst = std::max(worst, std::fabs(s.component(0, std::span<const double>(&x, 1)) - (0.5 * x * x + 0.5 * x)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("natural parameter: d=2 oracle round trip") {
  DensitySpec c;
  c.kind = DensityKind::nonproduct_coupling;
  c.strength = 0.5;
  const auto kr = KrMap::build(make_test_density(c, 2), uniform_reference(2));
  const RationalTriangularMap s(natural_parameter(kr, kLink), kLink);
  const TensorGrid g = make_tensor_grid(GridSpec::trapezoid(2, 33));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    for (std::size_t k = 0; k < 2; ++k) worst = std::max(worst, std::fabs(s.component(k, x) - kr->component(k, x)));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("natural parameter: partial outside the link range") {
  DensitySpec tilt;
  tilt.kind = DensityKind::linear_tilt;
  tilt.tilt = 0.5;
  const auto kr = KrMap::build(make_test_density(tilt, 1), uniform_reference(1));
  CHECK_THROWS_AS(natural_parameter(kr, LinkFunction::calibrated(0.8, 1.2)), DomainError);
}

TEST_CASE("C1_diag distances") {
  const auto id = FunctionalTriangularMap::identity(1);
  const FunctionalTriangularMap sq({[](std::span<const double> v) { return v[0] * v[0]; }},
                                   {[](std::span<const double> v) { return 2.0 * v[0]; }});
  const GridSpec probe = GridSpec::trapezoid(1, 129);
  CHECK(c1diag_distance(*id, *id, probe) == 0.0);
  CHECK(c1diag_distance(*id, sq, probe) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(c1diag_norm(sq, probe) == doctest::Approx(3.0).epsilon(1e-15));
  const auto id2 = FunctionalTriangularMap::identity(2);
  CHECK(c1diag_norm(*id2, GridSpec::trapezoid(2, 9)) == 4.0);
}

TEST_CASE("increment bound: one constant over random parameter pairs") {
  std::mt19937_64 rng(17);
  const auto b = basis(WaveletFamily::haar, 1, 3);
  const GridSpec probe = GridSpec::trapezoid(1, 257);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Theta t1 = random_theta(b, 1.0, rng);
    Theta t2 = t1;
    std::normal_distribution<double> n(0.0, std::pow(10.0, -1.0 - rep % 4));
    for (auto& v : t2.values()) v += n(rng);
    const RationalTriangularMap s1(t1, kLink);
    const RationalTriangularMap s2(t2, kLink);
    double sup = 0.0;
    const AxisRule r = axis_rule(GridSpec::gauss_legendre(1, 16, 8));
    for (double x : r.nodes) sup = std::max(sup, std::fabs(s1.parameter(0, std::span<const double>(&x, 1)) -
                                                         s2.parameter(0, std::span<const double>(&x, 1))));
    worst = std::max(worst, c1diag_distance(s1, s2, probe) / sup);
  }
  // 2 ||Phi'||_inf / K_min * (1 + K_max / K_min) bounds the ratio
  CHECK(worst <= 2.0 * kLink.max_slope() / kLink.k_min() * (1.0 + kLink.k_max() / kLink.k_min()));
}
