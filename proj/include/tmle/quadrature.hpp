#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tmle {

using PointFunction = std::function<double(std::span<const double>)>;

enum class QuadratureRule { trapezoid, gauss_legendre };

// Tensor-product quadrature on Q_dim = [0,1]^dim.
struct GridSpec {
  std::size_t dim = 1;
  std::size_t nodes_per_axis = 513;
  QuadratureRule rule = QuadratureRule::trapezoid;
  std::size_t panels = 0;  // gauss_legendre only
  std::size_t order = 0;   // gauss_legendre only

  static constexpr std::size_t kMaxNodes = std::size_t{1} << 24;

  static GridSpec trapezoid(std::size_t dim, std::size_t nodes_per_axis);
  static GridSpec gauss_legendre(std::size_t dim, std::size_t panels, std::size_t order);
  // 513 nodes for d=1, 129^2 for d=2, 33^3 for d=3 (and 17 per axis beyond).
  static GridSpec default_for(std::size_t dim);

  std::size_t total_nodes() const;
  // Throws InputError when the grid is degenerate or exceeds kMaxNodes.
  void validate() const;
  GridSpec with_dim(std::size_t new_dim) const;
};

struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule of the given order mapped to [a, b].
AxisRule gauss_legendre(std::size_t order, double a = 0.0, double b = 1.0);
// `panels` equal panels on [a, b], each with an order-`order` Gauss-Legendre rule.
AxisRule composite_gauss_legendre(std::size_t panels, std::size_t order, double a = 0.0,
                                  double b = 1.0);
// The per-axis rule of a grid on [0, 1].
AxisRule axis_rule(const GridSpec& grid);

// Quadrature approximation of the integral of f over Q_dim. Sums are nested
// axis by axis, so a constant integrand on a dyadic trapezoid grid integrates
// exactly. Throws NumericalError naming the node if f is not finite there.
double integrate(const PointFunction& f, const GridSpec& grid);

// Flattened tensor grid: points row-major (total_nodes x dim) and the product
// weights. Used where several integrands share the same node values.
struct TensorGrid {
  std::size_t dim = 0;
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * dim, dim};
  }
};

TensorGrid make_tensor_grid(const GridSpec& grid);

}  // namespace tmle
