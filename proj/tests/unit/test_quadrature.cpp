#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tmle/error.hpp"
#include "tmle/quadrature.hpp"

using namespace tmle;

TEST_CASE("constant integrates to one on every grid") {
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  for (std::size_t d = 1; d <= 3; ++d) {
    CHECK(integrate(one, GridSpec::trapezoid(d, 17)) == 1.0);
    CHECK(integrate(one, GridSpec::default_for(d)) == 1.0);
    CHECK(integrate(one, GridSpec::gauss_legendre(d, 4, 8)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("weights sum to the unit volume") {
  for (const GridSpec& g : {GridSpec::trapezoid(1, 513), GridSpec::gauss_legendre(1, 16, 8)}) {
    const AxisRule r = axis_rule(g);
    double s = 0.0;
    for (double w : r.weights) s += w;
    CHECK(std::fabs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("linear function on a 257-node trapezoid") {
  const PointFunction f = [](std::span<const double> x) { return x[0]; };
  CHECK(std::fabs(integrate(f, GridSpec::trapezoid(1, 257)) - 0.5) <= 1e-12);
}

TEST_CASE("product of sines with Gauss-Legendre order 8, 16 panels") {
  const PointFunction f = [](std::span<const double> x) {
    return std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
  };
  const double exact = 4.0 / (std::numbers::pi * std::numbers::pi);
  CHECK(std::fabs(integrate(f, GridSpec::gauss_legendre(2, 16, 8)) - exact) <= 1e-8);
  // refined-grid oracle
  CHECK(std::fabs(integrate(f, GridSpec::gauss_legendre(2, 32, 12)) - exact) <= 1e-12);
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (std::size_t n = 1; n <= 12; ++n) {
    const AxisRule r = gauss_legendre(n, 0.0, 1.0);
    for (std::size_t p = 0; p < 2 * n; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], static_cast<double>(p));
      CHECK(s == doctest::Approx(1.0 / static_cast<double>(p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("trapezoid converges at second order on a C2 integrand") {
  const PointFunction f = [](std::span<const double> x) { return std::exp(x[0]); };
  const double exact = std::exp(1.0) - 1.0;
  const double e1 = std::fabs(integrate(f, GridSpec::trapezoid(1, 65)) - exact);
  const double e2 = std::fabs(integrate(f, GridSpec::trapezoid(1, 129)) - exact);
  CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("non-finite value names the node") {
  const PointFunction f = [](std::span<const double> x) { return x[0] > 0.5 ? NAN : 1.0; };
  CHECK_THROWS_AS(integrate(f, GridSpec::trapezoid(1, 9)), NumericalError);
  try {
    integrate(f, GridSpec::trapezoid(1, 9));
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("0.625") != std::string::npos);
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec::trapezoid(1, 1).validate(), InputError);
  CHECK_THROWS_AS(GridSpec::trapezoid(4, 1025).validate(), InputError);
  CHECK_NOTHROW(GridSpec::default_for(3).validate());
  CHECK(GridSpec::default_for(1).total_nodes() == 513);
  CHECK(GridSpec::default_for(2).total_nodes() == 129 * 129);
  CHECK(GridSpec::default_for(3).total_nodes() == 33 * 33 * 33);
}

TEST_CASE("tensor grid matches nested integration") {
  const PointFunction f = [](std::span<const double> x) { return x[0] * x[0] + std::cos(x[1]); };
  const GridSpec g = GridSpec::gauss_legendre(2, 4, 6);
  const TensorGrid t = make_tensor_grid(g);
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += t.weights[i] * f(t.point(i));
  CHECK(s == doctest::Approx(integrate(f, g)).epsilon(1e-14));
}
