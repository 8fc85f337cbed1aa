#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "tmle/cdf_table.hpp"
#include "tmle/density.hpp"
#include "tmle/triangular_map.hpp"

namespace tmle {

// Quadrature used to integrate out trailing coordinates.
struct MarginalizationRule {
  std::size_t panels = 4;
  std::size_t order = 8;
};

// nu~_k(x_{1:k}) = integral of nu over the last d-k coordinates. `order` is
// 1-based as in the usual notation: order 0 gives the constant 1, order d
// gives nu itself. The returned function takes the first `order` coordinates.
PointFunction marginal_density(const DensityField& nu, std::size_t order,
                               MarginalizationRule rule = {});

// nu_k = nu~_k / nu~_{k-1} for 1 <= order <= d. Throws NumericalError when
// the denominator drops below 1e-12.
PointFunction conditional_density(const DensityField& nu, std::size_t order,
                                  MarginalizationRule rule = {});

// F_k(x_k | x_{1:k-1}) by direct quadrature. `prefix` holds x_{1:k-1}.
double conditional_cdf(const DensityField& nu, std::size_t order, std::span<const double> prefix,
                       double x_k, MarginalizationRule rule = {});

struct KrOptions {
  // Conditioning points per axis; 0 picks 65 for d <= 2 and 17 otherwise.
  std::size_t conditioning_points = 0;
  std::size_t cdf_cells = 512;
  std::size_t panel_order = 8;
  MarginalizationRule marginalization{};
};

// The Knothe-Rosenblatt rearrangement pushing `target` onto a factorized
// `reference`: S_k = (F^ref_k)^{-1} o F^target_k(. | x_{1:k-1}).
//
// For every component the conditional CDFs are tabulated on a uniform tensor
// grid of conditioning points and interpolated across that grid with local
// cubic Lagrange weights.
class KrMap final : public TriangularMap {
 public:
  static std::shared_ptr<const KrMap> build(const DensityField& target,
                                            const FactorizedDensity& reference,
                                            KrOptions options = {});

  std::size_t dim() const override { return components_.size(); }
  double component(std::size_t k, std::span<const double> x) const override;
  double diagonal_partial(std::size_t k, std::span<const double> x) const override;

  // Interpolated conditional CDF of the target for component k.
  double target_cdf(std::size_t k, std::span<const double> x) const;
  std::size_t conditioning_points() const { return grid_points_; }
  const FactorizedDensity& reference() const { return reference_; }

 private:
  struct Component {
    std::vector<CdfTable> tables;  // grid_points_^k tables, first axis slowest
  };

  KrMap(FactorizedDensity reference, std::size_t grid_points)
      : reference_(std::move(reference)), grid_points_(grid_points) {}

  template <class Fn>
  double blend(std::size_t k, std::span<const double> x, Fn&& per_table) const;

  FactorizedDensity reference_;
  std::size_t grid_points_;
  std::vector<Component> components_;
};

struct SampleSet {
  std::size_t dim = 0;
  std::vector<double> points;  // row-major, size() x dim

  std::size_t size() const { return dim == 0 ? 0 : points.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
};

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

// Draws count points from the reference coordinate-wise by inverse CDF.
SampleSet sample_reference(const FactorizedDensity& reference, std::size_t count, std::uint64_t seed);

// Inverse-Rosenblatt sampling of the target whose map onto `reference` is
// `map`: Z ~ reference, X = map^{-1}(Z).
SampleSet sample_target(const TriangularMap& map, const FactorizedDensity& reference,
                        std::size_t count, std::uint64_t seed);

}  // namespace tmle
