#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace tmle {

// Monotone tabulation of a one-dimensional CDF on [0,1].
//
// Node values are exact panel integrals (composite Gauss-Legendre per cell)
// of the supplied density, normalized so that F(0) = 0 and F(1) = 1 exactly.
// Between nodes the CDF is the cubic Hermite interpolant of (F, f), so a
// density that is linear per cell is reproduced to round-off.
class CdfTable {
 public:
  CdfTable() = default;
  CdfTable(const std::function<double(double)>& density, std::size_t cells,
           std::size_t panel_order = 8);

  std::size_t cells() const { return values_.empty() ? 0 : values_.size() - 1; }
  // Integral of the unnormalized density over [0,1].
  double total_mass() const { return total_; }

  double cdf(double x) const;
  // Derivative of the Hermite interpolant, i.e. the normalized density.
  double pdf(double x) const;
  // Inverse by segment search, bisection to width 1e-12, one Newton polish.
  double inverse(double u) const;

  const std::vector<double>& node_values() const { return values_; }
  const std::vector<double>& node_densities() const { return slopes_; }

 private:
  std::size_t segment(double x, double& t) const;

  std::vector<double> values_;
  std::vector<double> slopes_;
  double total_ = 0.0;
};

}  // namespace tmle
