#include "tmle/link.hpp"

#include <cmath>
#include <string>

#include "tmle/error.hpp"

namespace tmle {

LinkFunction::LinkFunction(double k_min, double k_max, double r) : k_min_(k_min), k_max_(k_max), r_(r) {
  if (!(k_min_ > 0.0) || !(k_max_ > k_min_) || !std::isfinite(k_max_)) {
    throw InputError("link needs 0 < k_min < k_max < inf");
  }
  if (!(r_ > 0.0)) throw InputError("link shape must be positive");
}

LinkFunction LinkFunction::logistic(double k_min, double k_max) { return {k_min, k_max, 1.0}; }

LinkFunction LinkFunction::calibrated(double k_min, double k_max) {
  if (!(k_min < 1.0 && 1.0 < k_max)) {
    throw InputError("calibrated link needs k_min < 1 < k_max (got " + std::to_string(k_min) + ", " +
                     std::to_string(k_max) + ")");
  }
  return {k_min, k_max, (k_max - 1.0) / (1.0 - k_min)};
}

namespace {
// s = 1 / (1 + r e^{-t}) in (0, 1), stable for large |t|.
inline double squash(double t, double r) {
  if (t >= 0.0) return 1.0 / (1.0 + r * std::exp(-t));
  const double e = std::exp(t);
  return e / (e + r);
}
}  // namespace

double LinkFunction::phi(double t) const { return k_min_ + (k_max_ - k_min_) * squash(t, r_); }

double LinkFunction::phi_prime(double t) const {
  const double s = squash(t, r_);
  return (k_max_ - k_min_) * s * (1.0 - s);
}

void LinkFunction::phi_and_prime(double t, double& value, double& prime) const {
  const double s = squash(t, r_);
  value = k_min_ + (k_max_ - k_min_) * s;
  prime = (k_max_ - k_min_) * s * (1.0 - s);
}

double LinkFunction::phi_inverse(double v) const {
  if (!(v > k_min_ && v < k_max_)) {
    throw DomainError("value " + std::to_string(v) + " is outside the link range (" + std::to_string(k_min_) +
                      ", " + std::to_string(k_max_) + "); widen (k_min, k_max)");
  }
  return std::log((v - k_min_) / (k_max_ - v)) + std::log(r_);
}

}  // namespace tmle
