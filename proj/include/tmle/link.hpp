#pragma once

namespace tmle {

// Regular link Phi: R -> (k_min, k_max), smooth and strictly increasing:
//   Phi(t) = k_min + (k_max - k_min) / (1 + r * exp(-t)).
// r = 1 is the plain logistic; calibrated() picks r so that Phi(0) = 1.
class LinkFunction {
 public:
  static LinkFunction logistic(double k_min, double k_max);
  // Requires k_min < 1 < k_max; then theta = 0 yields the identity map.
  static LinkFunction calibrated(double k_min, double k_max);

  double k_min() const { return k_min_; }
  double k_max() const { return k_max_; }
  double shape() const { return r_; }

  double phi(double t) const;
  double phi_prime(double t) const;
  // Both at once, sharing the exponential.
  void phi_and_prime(double t, double& value, double& prime) const;
  // Throws DomainError outside the open interval (k_min, k_max).
  double phi_inverse(double v) const;
  // sup_t Phi'(t) = (k_max - k_min) / 4.
  double max_slope() const { return 0.25 * (k_max_ - k_min_); }

 private:
  LinkFunction(double k_min, double k_max, double r);

  double k_min_;
  double k_max_;
  double r_;
};

}  // namespace tmle
