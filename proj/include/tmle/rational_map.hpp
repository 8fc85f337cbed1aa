#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "tmle/link.hpp"
#include "tmle/quadrature.hpp"
#include "tmle/triangular_map.hpp"
#include "tmle/wavelet.hpp"

namespace tmle {

namespace detail {
class NodeTable;
}

// Wavelet coefficients theta = (theta^1, ..., theta^d), stored flat in
// component order; component k occupies
// [basis.component_offset(k), basis.component_offset(k+1)).
class Theta {
 public:
  Theta(std::shared_ptr<const WaveletBasis> basis, double alpha);

  const WaveletBasis& basis() const { return *basis_; }
  const std::shared_ptr<const WaveletBasis>& basis_ptr() const { return basis_; }
  double alpha() const { return alpha_; }
  int max_level() const { return basis_->max_level(); }
  std::size_t dim() const { return basis_->dim(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> component(std::size_t k);
  std::span<const double> component(std::size_t k) const;
  // (k, l, m) with k 0-based and m 1-based within the level.
  double& at(std::size_t k, int level, std::size_t m);
  double at(std::size_t k, int level, std::size_t m) const;

 private:
  std::shared_ptr<const WaveletBasis> basis_;
  double alpha_;
  std::vector<double> values_;
};

// 2^{2 l alpha} for every flat coefficient.
std::vector<double> penalty_weights(const WaveletBasis& basis, double alpha);
// ||theta||_{b^alpha_22} = (sum_k sum_l sum_m 2^{2 l alpha} |theta^k_lm|^2)^{1/2}
double b_alpha_norm(const Theta& theta, double alpha);
double b_alpha_norm(const Theta& theta);

// Nodes for the one-dimensional integrals along x_k: `panels` equal panels,
// each with an order-`order` Gauss-Legendre rule.
struct PanelLayout {
  std::size_t panels = 0;
  std::size_t order = 0;
  std::vector<double> unit_nodes;    // on [0,1]
  std::vector<double> unit_weights;  // sum 1
  std::vector<double> nodes;
  std::vector<double> weights;

  PanelLayout(std::size_t panels, std::size_t order);
  double width() const { return 1.0 / static_cast<double>(panels); }
};

// S_{F,k}(x) = int_0^{x_k} Phi(F_k(x_{1:k-1}, y)) dy / int_0^1 Phi(F_k(x_{1:k-1}, y)) dy.
//
// The parameter is either a wavelet Theta (panels at the dyadic breakpoints
// 2^-(J+1)) or arbitrary component functions F_k on Q_k. The numerator at
// x_k = 1 and the denominator are the same panel sum, so S_k(., 1) = 1
// exactly.
class RationalTriangularMap final : public TriangularMap {
 public:
  RationalTriangularMap(Theta theta, LinkFunction link, std::size_t quadrature_order = 8);
  RationalTriangularMap(std::vector<PointFunction> functions, LinkFunction link, std::size_t panels = 64,
                        std::size_t quadrature_order = 8);

  std::size_t dim() const override { return dim_; }
  double component(std::size_t k, std::span<const double> x) const override;
  double diagonal_partial(std::size_t k, std::span<const double> x) const override;

  // F_k(x_{1:k}).
  double parameter(std::size_t k, std::span<const double> x) const;
  // Denominator int_0^1 Phi(F_k(prefix, y)) dy for the given prefix x_{1:k-1}.
  double normalizer(std::size_t k, std::span<const double> prefix) const;

  const LinkFunction& link() const { return link_; }
  const Theta* theta() const { return theta_ ? theta_.get() : nullptr; }
  const PanelLayout& layout() const { return *layout_; }

 private:
  struct SliceValues;
  void fill_slice(std::size_t k, std::span<const double> prefix, SliceValues& s) const;

  std::size_t dim_;
  LinkFunction link_;
  std::shared_ptr<const Theta> theta_;
  std::shared_ptr<const detail::NodeTable> table_;
  std::vector<PointFunction> functions_;
  std::shared_ptr<const PanelLayout> layout_;
};

// Panel layout used for a wavelet basis: 2^(J+1) panels of the given order.
PanelLayout wavelet_panel_layout(const WaveletBasis& basis, std::size_t order);

// F^natural_k = Phi^{-1}(d_k S_k). Probes each diagonal partial on a grid
// (probe_points per axis) and throws DomainError if any value leaves the
// link range.
std::vector<PointFunction> natural_parameter(TriangularMapPtr map, const LinkFunction& link,
                                             std::size_t probe_points = 33);

// L^2(Q_k) inner products <f, psi^k_i> for every basis function of
// component k, by Gauss-Legendre quadrature on the dyadic panels of the
// finest level. For the Haar backend this is the orthogonal projection.
std::vector<double> project_onto_basis(const WaveletBasis& basis, std::size_t k, const PointFunction& f,
                                       std::size_t order = 2);

// Grid approximation of sum_k ||S_k - T_k||_inf + sum_k ||d_k S_k - d_k T_k||_inf,
// with each component probed on the grid restricted to Q_k.
double c1diag_distance(const TriangularMap& s, const TriangularMap& t, const GridSpec& probe);
// ||S||_{C^1_diag} on the same probe grid.
double c1diag_norm(const TriangularMap& s, const GridSpec& probe);

}  // namespace tmle
