#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tmle/density.hpp"
#include "tmle/quadrature.hpp"
#include "tmle/triangular_map.hpp"

namespace tmle {

struct MetricsReport {
  double hellinger = 0.0;
  double l2 = 0.0;
  double kl = 0.0;
  double tv = 0.0;
  GridSpec grid;
};

// h(p, q) = (int (sqrt p - sqrt q)^2)^{1/2}. Throws InputError on a negative
// density value at a node.
double hellinger(const DensityField& p, const DensityField& q, const GridSpec& grid);
// KL(p || q) = int p log(p / q), evaluated as int (p log(p/q) - p + q), which
// agrees for normalized inputs and is non-negative node by node. Throws
// DomainError where q < 1e-12.
double kl_divergence(const DensityField& p, const DensityField& q, const GridSpec& grid);
double l2_distance(const DensityField& p, const DensityField& q, const GridSpec& grid);
// int |p - q| (L^1 convention, at most 2).
double tv_distance(const DensityField& p, const DensityField& q, const GridSpec& grid);

// All four from a single tabulation of p and q.
MetricsReport compare_densities(const DensityField& p, const DensityField& q, const GridSpec& grid);

// Same metrics for densities already tabulated on a TensorGrid.
MetricsReport compare_tabulated(std::span<const double> weights, std::span<const double> p,
                                std::span<const double> q, const GridSpec& grid);

// (sum_k ||S_k - T_k||^2_{L2(Q_k)} + ||d_k S_k - d_k T_k||^2_{L2(Q_k)})^{1/2},
// with the grid's per-axis rule restricted to Q_k.
double h1diag_map_distance(const TriangularMap& s, const TriangularMap& t, const GridSpec& grid);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of log(error) on log(N). Needs at least 3 points, positive
// errors and at least two distinct N.
RateFit rate_fit(std::span<const std::pair<double, double>> points);

}  // namespace tmle
