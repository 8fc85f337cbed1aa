#include <doctest.h>

#include <cmath>

#include "tmle/error.hpp"
#include "tmle/link.hpp"

using namespace tmle;

TEST_CASE("plain logistic") {
  const LinkFunction l = LinkFunction::logistic(0.5, 2.0);
  CHECK(l.phi(0.0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(l.phi_prime(0.0) == doctest::Approx(1.5 / 4.0).epsilon(1e-15));
  CHECK(l.max_slope() == doctest::Approx(0.375));
  CHECK(l.phi(-800.0) == doctest::Approx(0.5));
  CHECK(l.phi(800.0) == doctest::Approx(2.0));
  CHECK(std::isfinite(l.phi_prime(-800.0)));
}

TEST_CASE("calibrated link has phi(0) = 1") {
  for (auto [lo, hi] : {std::pair{0.25, 4.0}, std::pair{0.5, 2.0}, std::pair{0.9, 1.1}}) {
    const LinkFunction l = LinkFunction::calibrated(lo, hi);
    CHECK(l.phi(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(l.shape() == doctest::Approx((hi - 1.0) / (1.0 - lo)));
    CHECK(l.phi_inverse(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(LinkFunction::calibrated(1.5, 4.0), InputError);
  CHECK_THROWS_AS(LinkFunction::calibrated(0.25, 0.9), InputError);
  CHECK_THROWS_AS(LinkFunction::logistic(2.0, 1.0), InputError);
  CHECK_THROWS_AS(LinkFunction::logistic(0.0, 1.0), InputError);
}

TEST_CASE("monotone, bounded, invertible on a probe range") {
  const LinkFunction l = LinkFunction::calibrated(0.25, 4.0);
  double prev = 0.0;
  for (int i = -400; i <= 400; ++i) {
    const double t = i * 0.05;
    const double v = l.phi(t);
    CHECK(v > l.k_min());
    CHECK(v < l.k_max());
    CHECK(l.phi_prime(t) > 0.0);
    if (i > -400) CHECK(v > prev);
    prev = v;
    if (std::fabs(t) <= 10.0) CHECK(std::fabs(l.phi_inverse(v) - t) <= 1e-10);
  }
}

TEST_CASE("derivative matches central differences") {
  const LinkFunction l = LinkFunction::calibrated(0.25, 4.0);
  for (double t : {-6.0, -1.0, -0.3, 0.0, 0.7, 2.5, 9.0}) {
    const double h = 1e-5;
    const double fd = (l.phi(t + h) - l.phi(t - h)) / (2.0 * h);
    CHECK(std::fabs(l.phi_prime(t) - fd) <= 1e-9);
    double v = 0.0;
    double p = 0.0;
    l.phi_and_prime(t, v, p);
    CHECK(v == l.phi(t));
    CHECK(p == l.phi_prime(t));
    CHECK(p <= l.max_slope() + 1e-15);
  }
}

TEST_CASE("inverse outside the range names the remedy") {
  const LinkFunction l = LinkFunction::calibrated(0.5, 2.0);
  CHECK_THROWS_AS(l.phi_inverse(0.5), DomainError);
  CHECK_THROWS_AS(l.phi_inverse(2.5), DomainError);
  try {
    l.phi_inverse(3.0);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("widen") != std::string::npos);
  }
}
