#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tmle/density.hpp"
#include "tmle/error.hpp"
#include "tmle/quadrature.hpp"

using namespace tmle;

namespace {

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

}  // namespace

TEST_CASE("uniform density is one everywhere") {
  const DensityField p = make_test_density(DensitySpec{}, 2);
  CHECK(p.is_uniform());
  const TensorGrid g = make_tensor_grid(GridSpec::trapezoid(2, 9));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(p(g.point(i)) == 1.0);
}

TEST_CASE("linear tilt a=1/2 is x + 1/2") {
  const DensityField p = make_test_density(tilt(0.5), 1);
  for (double x : {0.0, 0.1, 0.5, 0.9, 1.0}) CHECK(p(x) == doctest::Approx(x + 0.5).epsilon(1e-15));
  CHECK(std::fabs(integrate([&](std::span<const double> x) { return p(x); }, GridSpec::default_for(1)) - 1.0) <= 1e-12);
}

TEST_CASE("nonproduct coupling integrates to one") {
  const DensityField p = make_test_density(coupling(0.5), 2);
  const double s = integrate([&](std::span<const double> x) { return p(x); }, GridSpec::default_for(2));
  CHECK(std::fabs(s - 1.0) <= 1e-10);
  const double x[2] = {0.0, 0.0};
  CHECK(p(x) == doctest::Approx(1.5));
}

TEST_CASE("constructed densities are normalized") {
  DensitySpec bump;
  bump.kind = DensityKind::cosine_bump;
  bump.amplitude = 0.4;
  bump.frequency = 2;
  DensitySpec prod;
  prod.kind = DensityKind::product_of_marginals;
  prod.marginals = {tilt(0.3), bump, DensitySpec{}};
  for (std::size_t d = 1; d <= 3; ++d) {
    for (const DensitySpec& s : {tilt(0.5), bump, prod, coupling(0.3)}) {
      if (s.kind == DensityKind::nonproduct_coupling && d < 2) continue;
      if (s.kind == DensityKind::product_of_marginals && d != 3) continue;
      const DensityField p = make_test_density(s, d);
      const double v = integrate([&](std::span<const double> x) { return p(x); }, GridSpec::default_for(d));
      CHECK(std::fabs(v - 1.0) <= (d == 1 ? 1e-8 : 1e-5));
    }
  }
}

TEST_CASE("positivity violations are rejected") {
  CHECK_THROWS_AS(make_test_density(tilt(1.0), 1), InputError);
  CHECK_THROWS_AS(make_test_density(tilt(0.9), 1), InputError);  // factor min 0.1 < 0.25
  DensitySpec bump;
  bump.kind = DensityKind::cosine_bump;
  bump.amplitude = 1.2;
  CHECK_THROWS_AS(make_test_density(bump, 1), InputError);
  CHECK_THROWS_AS(make_test_density(coupling(1.0), 2), InputError);
  CHECK_THROWS_AS(make_test_density(coupling(0.5), 1), InputError);
}

TEST_CASE("class membership reports") {
  const ClassReport u = validate_class_membership(make_test_density(DensitySpec{}, 1), GridSpec::default_for(1));
  CHECK(u.min == 1.0);
  CHECK(u.max == 1.0);
  CHECK(u.integral == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(u.ok());

  const ClassReport t = validate_class_membership(make_test_density(tilt(0.5), 1), GridSpec::default_for(1));
  CHECK(t.min == doctest::Approx(0.5));
  CHECK(t.max == doctest::Approx(1.5));
  CHECK(t.integral == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.ok());

  const DensityField two(1, [](std::span<const double>) { return 2.0; }, 1.0, 3.0);
  const ClassReport r = validate_class_membership(two, GridSpec::default_for(1));
  CHECK(r.integral == doctest::Approx(2.0));
  CHECK(r.not_normalized);
  CHECK_FALSE(r.ok());
}

TEST_CASE("factorized density equals the product of marginals exactly") {
  DensitySpec prod;
  prod.kind = DensityKind::product_of_marginals;
  DensitySpec bump;
  bump.kind = DensityKind::cosine_bump;
  bump.amplitude = 0.3;
  prod.marginals = {tilt(0.4), bump, tilt(-0.2)};
  const FactorizedDensity f = make_factorized_density(prod, 3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x[3] = {u(rng), u(rng), u(rng)};
    double p = 1.0;
    for (std::size_t k = 0; k < 3; ++k) p *= f.marginal(k).pdf(x[k]);
    CHECK(f(x) == p);
  }
}

TEST_CASE("marginal CDF and inverse") {
  const FactorizedDensity f = make_factorized_density(tilt(0.5), 1);
  const Marginal& m = f.marginal(0);
  for (double x : {0.0, 0.2, 0.5, 0.77, 1.0}) {
    CHECK(m.cdf(x) == doctest::Approx(0.5 * x * x + 0.5 * x).epsilon(1e-14));
    CHECK(m.inverse_cdf(m.cdf(x)) == doctest::Approx(x).epsilon(1e-12));
  }
  CHECK(m.derivative(0.3) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("nonproduct reference is unsupported") {
  CHECK_THROWS_AS(make_factorized_density(coupling(0.5), 2), InputError);
}

TEST_CASE("density kind names round trip") {
  for (DensityKind k : {DensityKind::uniform, DensityKind::linear_tilt, DensityKind::cosine_bump,
                        DensityKind::product_of_marginals, DensityKind::nonproduct_coupling}) {
    CHECK(density_kind_from_string(to_string(k)) == k);
  }
  CHECK(density_kind_from_string("linear_tilt") == DensityKind::linear_tilt);
  CHECK_THROWS_AS(density_kind_from_string("gaussian"), InputError);
}
