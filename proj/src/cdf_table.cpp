#include "tmle/cdf_table.hpp"

#include <algorithm>
#include <cmath>

#include "tmle/error.hpp"
#include "tmle/quadrature.hpp"

namespace tmle {

CdfTable::CdfTable(const std::function<double(double)>& density, std::size_t cells,
                   std::size_t panel_order) {
  if (cells < 1) throw InputError("CdfTable needs at least one cell");
  const AxisRule unit = gauss_legendre(panel_order, 0.0, 1.0);
  const double h = 1.0 / static_cast<double>(cells);
  std::vector<double> cumulative(cells + 1, 0.0);
  slopes_.resize(cells + 1);
  for (std::size_t c = 0; c < cells; ++c) {
    const double left = h * static_cast<double>(c);
    double mass = 0.0;
    for (std::size_t q = 0; q < unit.nodes.size(); ++q) {
      const double v = density(left + h * unit.nodes[q]);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw NumericalError("density must be positive and finite for CDF tabulation (got " +
                             std::to_string(v) + " at x=" + std::to_string(left + h * unit.nodes[q]) + ")");
      }
      mass += unit.weights[q] * v;
    }
    cumulative[c + 1] = cumulative[c] + h * mass;
  }
  for (std::size_t i = 0; i <= cells; ++i) {
    const double x = i == cells ? 1.0 : h * static_cast<double>(i);
    slopes_[i] = density(x);
  }
  total_ = cumulative.back();
  if (!(total_ > 1e-12)) throw NumericalError("density integrates to a non-positive value");
  values_.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    values_[i] = cumulative[i] / total_;
    slopes_[i] /= total_;
  }
  values_.front() = 0.0;
  values_.back() = 1.0;
}

std::size_t CdfTable::segment(double x, double& t) const {
  const std::size_t n = cells();
  const double scaled = std::clamp(x, 0.0, 1.0) * static_cast<double>(n);
  std::size_t i = static_cast<std::size_t>(scaled);
  if (i >= n) i = n - 1;
  t = scaled - static_cast<double>(i);
  return i;
}

double CdfTable::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double t = 0.0;
  const std::size_t i = segment(x, t);
  const double h = 1.0 / static_cast<double>(cells());
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[i + 1] + h11 * h * slopes_[i + 1];
}

double CdfTable::pdf(double x) const {
  double t = 0.0;
  const std::size_t i = segment(x, t);
  const double h = 1.0 / static_cast<double>(cells());
  const double t2 = t * t;
  const double d00 = 6.0 * t2 - 6.0 * t;
  const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double d01 = -6.0 * t2 + 6.0 * t;
  const double d11 = 3.0 * t2 - 2.0 * t;
  return (d00 * values_[i] + d01 * values_[i + 1]) / h + d10 * slopes_[i] + d11 * slopes_[i + 1];
}

double CdfTable::inverse(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InversionError("CDF inverse requested outside [0,1]: " + std::to_string(u));
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  const auto it = std::upper_bound(values_.begin(), values_.end(), u);
  const std::size_t i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - values_.begin() - 1, 0,
                                                                            static_cast<std::ptrdiff_t>(cells()) - 1));
  const double h = 1.0 / static_cast<double>(cells());
  double lo = h * static_cast<double>(i);
  double hi = std::min(1.0, lo + h);
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  const double slope = pdf(x);
  if (slope > 0.0) {
    const double polished = x - (cdf(x) - u) / slope;
    if (polished >= lo - 1e-12 && polished <= hi + 1e-12) x = std::clamp(polished, 0.0, 1.0);
  }
  return x;
}

}  // namespace tmle
