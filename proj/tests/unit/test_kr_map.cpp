#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tmle/density.hpp"
#include "tmle/error.hpp"
#include "tmle/kr_map.hpp"
#include "tmle/quadrature.hpp"
#include "tmle/triangular_map.hpp"

using namespace tmle;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

DensitySpec tilt(double a) {
  DensitySpec s;
  s.kind = DensityKind::linear_tilt;
  s.tilt = a;
  return s;
}

DensitySpec coupling(double s) {
  DensitySpec spec;
  spec.kind = DensityKind::nonproduct_coupling;
  spec.strength = s;
  return spec;
}

// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> v, Cdf&& cdf) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

std::vector<double> column(const SampleSet& s, std::size_t k) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s.point(i)[k];
  return out;
}

}  // namespace

TEST_CASE("marginal densities") {
  const DensityField u = make_test_density(DensitySpec{}, 2);
  const double x1[1] = {0.3};
  CHECK(marginal_density(u, 1)(x1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(marginal_density(u, 0)(std::span<const double>{}) == 1.0);

  DensitySpec prod;
  prod.kind = DensityKind::product_of_marginals;
  prod.marginals = {tilt(0.5), tilt(0.5)};
  const DensityField p = make_test_density(prod, 2);
  const auto m1 = marginal_density(p, 1);
  for (double x : {0.0, 0.25, 0.9}) {
    const double pt[1] = {x};
    CHECK(m1(pt) == doctest::Approx(x + 0.5).epsilon(1e-12));
  }

  const DensityField c = make_test_density(coupling(0.5), 2);
  const auto mc = marginal_density(c, 1);
  for (double x : {0.0, 0.1, 0.5, 0.77}) {
    const double pt[1] = {x};
    CHECK(std::fabs(mc(pt) - 1.0) <= 1e-8);
  }
  CHECK_THROWS_AS(marginal_density(c, 3), InputError);
}

TEST_CASE("conditional densities") {
  const DensityField c = make_test_density(coupling(0.5), 2);
  const auto cond = conditional_density(c, 2);
  for (double y : {0.0, 0.2, 0.6, 1.0}) {
    const double pt[2] = {0.0, y};
    CHECK(std::fabs(cond(pt) - (1.0 + 0.5 * std::cos(kTwoPi * y))) <= 1e-8);
  }
  // normalized along x_k for every conditioning point
  for (double x1 : {0.0, 0.3, 0.8}) {
    const double v = integrate(
        [&](std::span<const double> y) {
          const double pt[2] = {x1, y[0]};
          return cond(pt);
        },
        GridSpec::gauss_legendre(1, 8, 8));
    CHECK(std::fabs(v - 1.0) <= 1e-8);
  }
  DensitySpec prod;
  prod.kind = DensityKind::product_of_marginals;
  prod.marginals = {DensitySpec{}, tilt(0.5)};
  const auto pc = conditional_density(make_test_density(prod, 2), 2);
  const double pt[2] = {0.4, 0.2};
  CHECK(pc(pt) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("conditional CDFs") {
  const DensityField u = make_test_density(DensitySpec{}, 1);
  CHECK(conditional_cdf(u, 1, {}, 0.37) == doctest::Approx(0.37).epsilon(1e-14));
  const DensityField t = make_test_density(tilt(0.5), 1);
  for (double x : {0.0, 0.3, 1.0}) {
    CHECK(std::fabs(conditional_cdf(t, 1, {}, x) - (0.5 * x * x + 0.5 * x)) <= 1e-13);
  }
  const DensityField c = make_test_density(coupling(0.5), 2);
  const double prefix[1] = {0.0};
  for (double y : {0.1, 0.25, 0.6}) {
    const double exact = y + 0.5 / kTwoPi * std::sin(kTwoPi * y);
    CHECK(std::fabs(conditional_cdf(c, 2, prefix, y) - exact) <= 1e-8);
  }
}

TEST_CASE("identity map when target equals reference") {
  for (std::size_t d = 1; d <= 3; ++d) {
    const auto kr = KrMap::build(make_test_density(DensitySpec{}, d), uniform_reference(d));
    const TensorGrid g = make_tensor_grid(GridSpec::trapezoid(d, 9));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.point(i);
      for (std::size_t k = 0; k < d; ++k) CHECK(std::fabs(kr->component(k, x) - x[k]) <= 1e-9);
    }
  }
}

TEST_CASE("d=1 linear tilt map is the closed-form CDF") {
  const auto kr = KrMap::build(make_test_density(tilt(0.5), 1), uniform_reference(1));
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    worst = std::max(worst, std::fabs(kr->component(0, std::span<const double>(&x, 1)) - (0.5 * x * x + 0.5 * x)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("d=2 coupling map against a dense-grid inversion oracle") {
  const DensityField c = make_test_density(coupling(0.5), 2);
  const auto kr = KrMap::build(c, uniform_reference(2));
  const double x[2] = {0.0, 0.25};
  const double closed = 0.25 + 0.5 / kTwoPi;
  CHECK(std::fabs(kr->component(1, x) - closed) <= 1e-6);
  // oracle at an off-grid conditioning value
  const double y[2] = {0.3141, 0.6};
  const double prefix[1] = {y[0]};
  CHECK(std::fabs(kr->component(1, y) - conditional_cdf(c, 2, prefix, y[1], {16, 12})) <= 1e-6);
}

TEST_CASE("pullback densities") {
  const auto id = FunctionalTriangularMap::identity(2);
  const DensityField eta = uniform_reference(2).as_field();
  const DensityField p = pullback_density(id, eta);
  const double x[2] = {0.3, 0.9};
  CHECK(p(x) == 1.0);

  auto sq = std::make_shared<FunctionalTriangularMap>(
      std::vector<FunctionalTriangularMap::ComponentFn>{[](std::span<const double> v) { return v[0] * v[0]; }},
      std::vector<FunctionalTriangularMap::ComponentFn>{[](std::span<const double> v) { return 2.0 * v[0]; }});
  const DensityField two_x = pullback_density(sq, uniform_reference(1).as_field());
  CHECK(two_x(0.3) == doctest::Approx(0.6));
  CHECK_THROWS_AS(two_x(0.0), MonotonicityError);

  const auto kr = KrMap::build(make_test_density(tilt(0.5), 1), uniform_reference(1));
  const DensityField back = pullback_density(kr, uniform_reference(1).as_field());
  for (double v : {0.0, 0.2, 0.5, 1.0}) CHECK(std::fabs(back(v) - (v + 0.5)) <= 1e-12);
}

TEST_CASE("pushforward error, monotonicity and regularity transfer on built maps") {
  const DensityField c = make_test_density(coupling(0.5), 2);
  const auto kr = KrMap::build(c, uniform_reference(2));
  const DensityField back = pullback_density(kr, uniform_reference(2).as_field());
  const TensorGrid g = make_tensor_grid(GridSpec::trapezoid(2, 65));
  double err = 0.0;
  double lo = 1e300;
  double hi = 0.0;
  double mono = 1e300;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    const double v = back(x);
    err = std::max(err, std::fabs(v - c(x)));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    for (std::size_t k = 0; k < 2; ++k) mono = std::min(mono, kr->diagonal_partial(k, x));
  }
  CHECK(err <= 5e-4);
  // c = 0.5, B = 1.5 for this density; slope bound c/B
  CHECK(mono >= 0.5 / 1.5 - 1e-6);
  CHECK(lo >= 0.5 - 5e-4);
  CHECK(hi <= 1.5 + 5e-4);
}

TEST_CASE("tabulated CDFs are monotone with exact end points") {
  const DensityField c = make_test_density(coupling(0.5), 2);
  const auto kr = KrMap::build(c, uniform_reference(2));
  for (double x1 : {0.0, 0.123, 0.5, 1.0}) {
    double prev = -1.0;
    for (int i = 0; i <= 400; ++i) {
      const double x[2] = {x1, i / 400.0};
      const double v = kr->component(1, x);
      CHECK(v >= prev);
      prev = v;
    }
    const double x0[2] = {x1, 0.0};
    const double x1v[2] = {x1, 1.0};
    CHECK(std::fabs(kr->component(1, x0)) <= 1e-10);
    CHECK(std::fabs(kr->component(1, x1v) - 1.0) <= 1e-10);
  }
}

TEST_CASE("inversion") {
  const auto id = FunctionalTriangularMap::identity(3);
  const double z[3] = {0.2, 0.5, 0.9};
  const auto x = invert_triangular(*id, z);
  for (std::size_t k = 0; k < 3; ++k) CHECK(x[k] == doctest::Approx(z[k]).epsilon(1e-12));

  FunctionalTriangularMap sq({[](std::span<const double> v) { return v[0] * v[0]; }},
                             {[](std::span<const double> v) { return 2.0 * v[0]; }});
  const double q = 0.25;
  CHECK(invert_triangular(sq, std::span<const double>(&q, 1))[0] == doctest::Approx(0.5).epsilon(1e-12));

  FunctionalTriangularMap short_map({[](std::span<const double> v) { return 0.5 * v[0]; }},
                                    {[](std::span<const double>) { return 0.5; }});
  const double far = 0.9;
  CHECK_THROWS_AS(invert_triangular(short_map, std::span<const double>(&far, 1)), InversionError);

  const auto kr = KrMap::build(make_test_density(coupling(0.5), 2), uniform_reference(2));
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double zz[2] = {unit_uniform(rng()), unit_uniform(rng())};
    const auto xx = invert_triangular(*kr, zz);
    const auto back = (*kr)(xx);
    for (std::size_t k = 0; k < 2; ++k) worst = std::max(worst, std::fabs(back[k] - zz[k]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("uniform draws use the top 53 bits") {
  CHECK(unit_uniform(0) == 0.0);
  CHECK(unit_uniform(~std::uint64_t{0}) < 1.0);
  CHECK(unit_uniform(std::uint64_t{1} << 63) == 0.5);
}

TEST_CASE("sampling: uniform target passes KS") {
  const auto kr = KrMap::build(make_test_density(DensitySpec{}, 1), uniform_reference(1));
  const SampleSet s = sample_target(*kr, uniform_reference(1), 100000, 42);
  const double d = ks_statistic(column(s, 0), [](double x) { return x; });
  CHECK(d < 1.628 / std::sqrt(100000.0));
}

TEST_CASE("sampling: linear tilt marginal and mean") {
  const auto kr = KrMap::build(make_test_density(tilt(0.5), 1), uniform_reference(1));
  const std::size_t n = 100000;
  const SampleSet s = sample_target(*kr, uniform_reference(1), n, 7);
  const auto v = column(s, 0);
  CHECK(ks_statistic(v, [](double x) { return 0.5 * x * x + 0.5 * x; }) < 1.628 / std::sqrt(double(n)));
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(n);
  // Var = E[X^2] - (7/12)^2 with E[X^2] = 1/4 + 1/6
  const double sigma = std::sqrt(5.0 / 12.0 - 49.0 / 144.0);
  CHECK(std::fabs(mean - 7.0 / 12.0) <= 3.0 * sigma / std::sqrt(double(n)));
}

TEST_CASE("sampling: coupling moment and marginals") {
  const double s = 0.5;
  const auto kr = KrMap::build(make_test_density(coupling(s), 2), uniform_reference(2));
  const std::size_t n = 40000;
  const SampleSet xs = sample_target(*kr, uniform_reference(2), n, 99);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = xs.point(i);
    m += std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
  }
  m /= double(n);
  // quadrature oracle for E[cos cos]
  const DensityField c = make_test_density(coupling(s), 2);
  const double oracle = integrate(
      [&](std::span<const double> x) { return std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]) * c(x); },
      GridSpec::gauss_legendre(2, 8, 8));
  CHECK(oracle == doctest::Approx(s / 4.0).epsilon(1e-10));
  CHECK(std::fabs(m - oracle) <= 4.0 * 0.5 / std::sqrt(double(n)));
  for (const double x : column(xs, 0)) CHECK((x >= 0.0 && x <= 1.0));
  CHECK(ks_statistic(column(xs, 0), [](double x) { return x; }) < 1.628 / std::sqrt(double(n)));
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto kr = KrMap::build(make_test_density(coupling(0.4), 2), uniform_reference(2));
  const SampleSet a = sample_target(*kr, uniform_reference(2), 700, 3);
  const SampleSet b = sample_target(*kr, uniform_reference(2), 700, 3);
  const SampleSet c = sample_target(*kr, uniform_reference(2), 700, 4);
  CHECK(a.points == b.points);
  CHECK(a.points != c.points);
}

TEST_CASE("tilted reference: pushforward hits the reference") {
  const DensityField target = make_test_density(coupling(0.3), 2);
  const FactorizedDensity ref = make_factorized_density(tilt(0.4), 2);
  const auto kr = KrMap::build(target, ref);
  const DensityField back = pullback_density(kr, ref.as_field());
  const TensorGrid g = make_tensor_grid(GridSpec::trapezoid(2, 33));
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::fabs(back(g.point(i)) - target(g.point(i))));
  CHECK(err <= 5e-4);
}
