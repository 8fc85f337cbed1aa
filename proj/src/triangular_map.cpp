#include "tmle/triangular_map.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tmle/error.hpp"

namespace tmle {

void TriangularMap::evaluate(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < dim(); ++k) out[k] = component(k, x.first(k + 1));
}

std::vector<double> TriangularMap::operator()(std::span<const double> x) const {
  std::vector<double> out(dim());
  evaluate(x, out);
  return out;
}

double TriangularMap::jacobian_determinant(std::span<const double> x) const {
  double det = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) det *= diagonal_partial(k, x.first(k + 1));
  return det;
}

FunctionalTriangularMap::FunctionalTriangularMap(std::vector<ComponentFn> components,
                                                 std::vector<ComponentFn> partials)
    : components_(std::move(components)), partials_(std::move(partials)) {
  if (components_.empty() || components_.size() != partials_.size()) {
    throw InputError("triangular map needs one component and one partial per dimension");
  }
}

std::shared_ptr<FunctionalTriangularMap> FunctionalTriangularMap::identity(std::size_t dim) {
  std::vector<ComponentFn> comps;
  std::vector<ComponentFn> parts;
  for (std::size_t k = 0; k < dim; ++k) {
    comps.emplace_back([k](std::span<const double> x) { return x[k]; });
    parts.emplace_back([](std::span<const double>) { return 1.0; });
  }
  return std::make_shared<FunctionalTriangularMap>(std::move(comps), std::move(parts));
}

double FunctionalTriangularMap::component(std::size_t k, std::span<const double> x) const {
  return components_.at(k)(x);
}

double FunctionalTriangularMap::diagonal_partial(std::size_t k, std::span<const double> x) const {
  return partials_.at(k)(x);
}

std::vector<double> invert_triangular(const TriangularMap& map, std::span<const double> z) {
  const std::size_t d = map.dim();
  if (z.size() < d) throw InputError("invert_triangular: point has fewer coordinates than the map");
  std::vector<double> x(d, 0.0);
  constexpr double kBracketSlack = 1e-12;
  for (std::size_t k = 0; k < d; ++k) {
    const std::span<const double> prefix(x.data(), k + 1);
    const double target = z[k];
    auto residual = [&](double t) {
      x[k] = t;
      return map.component(k, prefix) - target;
    };
    const double r_lo = residual(0.0);
    const double r_hi = residual(1.0);
    if (r_lo > kBracketSlack || r_hi < -kBracketSlack) {
      std::ostringstream os;
      os.precision(17);
      os << "root not bracketed for component " << k << ": target " << target << ", S_k(.,0)="
         << r_lo + target << ", S_k(.,1)=" << r_hi + target;
      throw InversionError(os.str());
    }
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      if (residual(mid) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double t = 0.5 * (lo + hi);
    const double r = residual(t);
    x[k] = t;
    const double slope = map.diagonal_partial(k, prefix);
    if (slope > 0.0 && std::isfinite(slope)) {
      const double polished = std::clamp(t - r / slope, 0.0, 1.0);
      if (std::fabs(residual(polished)) <= std::fabs(r)) t = polished;
    }
    x[k] = t;
    const double final_residual = std::fabs(map.component(k, prefix) - target);
    if (final_residual > 1e-9) {
      std::ostringstream os;
      os.precision(17);
      os << "inversion of component " << k << " left residual " << final_residual;
      throw InversionError(os.str());
    }
  }
  return x;
}

}  // namespace tmle

#include <limits>

#include "tmle/density.hpp"

namespace tmle {

DensityField pullback_density(TriangularMapPtr map, const DensityField& eta) {
  if (!map) throw InputError("pullback_density: null map");
  if (map->dim() != eta.dim()) throw InputError("pullback_density: map and density dimensions differ");
  const std::size_t d = map->dim();
  return DensityField(
      d,
      [map, eta, d](std::span<const double> x) {
        std::vector<double> y(d);
        double det = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
          const auto prefix = x.first(k + 1);
          const double partial = map->diagonal_partial(k, prefix);
          if (!(partial > 0.0)) {
            std::ostringstream os;
            os.precision(17);
            os << "diagonal partial of component " << k << " is " << partial << " at x_" << k << "="
               << x[k];
            throw MonotonicityError(os.str());
          }
          det *= partial;
          y[k] = map->component(k, prefix);
        }
        return eta(std::span<const double>(y)) * det;
      },
      0.0, std::numeric_limits<double>::infinity(), eta.smoothness(), "pullback(" + eta.label() + ")");
}

}  // namespace tmle
