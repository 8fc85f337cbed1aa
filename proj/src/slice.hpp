#pragma once

// Shared machinery for evaluating S_{F,k} along one fibre x_{1:k-1} = const.
// Used by RationalTriangularMap and by the likelihood objective.

#include <cstddef>
#include <span>
#include <vector>

#include "tmle/link.hpp"
#include "tmle/rational_map.hpp"
#include "tmle/wavelet.hpp"

namespace tmle::detail {

// Catalog functions tabulated at the panel nodes, with the non-zero node
// range of every row.
class NodeTable {
 public:
  NodeTable(const WaveletBasis& basis, std::size_t order);

  const WaveletBasis& basis() const { return *basis_; }
  const PanelLayout& layout() const { return layout_; }
  std::size_t nodes() const { return layout_.nodes.size(); }
  std::span<const double> row(std::size_t b) const { return {values_.data() + b * nodes(), nodes()}; }
  std::size_t row_begin(std::size_t b) const { return lo_[b]; }
  std::size_t row_end(std::size_t b) const { return hi_[b]; }

 private:
  const WaveletBasis* basis_;
  PanelLayout layout_;
  std::vector<double> values_;
  std::vector<std::size_t> lo_;
  std::vector<std::size_t> hi_;
};

// One fibre: F, Phi(F), Phi'(F) at the panel nodes and the cumulative panel
// integrals of Phi(F).
struct Slice {
  std::vector<double> coeffs;  // collapsed catalog coefficients (wavelet path)
  std::vector<double> f;
  std::vector<double> phi;
  std::vector<double> dphi;
  std::vector<double> wphi;       // weights * phi
  std::vector<double> wdphi;      // weights * dphi
  std::vector<double> panel_cum;  // panels + 1 entries, panel_cum[0] = 0
  double denominator = 0.0;
};

// Collapses theta for component k at the prefix into slice.coeffs.
void collapse_coefficients(const WaveletBasis& basis, std::span<const double> theta, std::size_t k,
                           std::span<const double> prefix,
                           std::vector<WaveletBasis::CollapsedGroup>& groups, Slice& slice);

// F at the nodes from slice.coeffs, then finish().
void fill_from_coefficients(const NodeTable& table, const LinkFunction& link, Slice& slice);
// Phi, Phi', panel sums and the denominator from slice.f.
void finish(const PanelLayout& layout, const LinkFunction& link, Slice& slice);

// F(y) = sum_b coeffs[b] * catalog_b(y) over the active catalog entries.
double collapsed_value(const WaveletBasis& basis, std::span<const double> coeffs, double y);

// Index of the panel containing x (the last panel for x = 1).
std::size_t panel_of(const PanelLayout& layout, double x);

// int_0^x Phi(F(y)) dy: completed panels from panel_cum plus a Gauss-Legendre
// pass over the partial panel with F supplied by f_at. x = 1 returns the
// denominator bit-for-bit.
template <class FAt>
double numerator(const PanelLayout& layout, const LinkFunction& link, const Slice& slice, double x,
                 FAt&& f_at) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return slice.panel_cum.back();
  const std::size_t p = panel_of(layout, x);
  const double a = static_cast<double>(p) * layout.width();
  const double len = x - a;
  double partial = 0.0;
  if (len > 0.0) {
    for (std::size_t q = 0; q < layout.order; ++q) {
      partial += layout.unit_weights[q] * link.phi(f_at(a + len * layout.unit_nodes[q]));
    }
  }
  return slice.panel_cum[p] + len * partial;
}

}  // namespace tmle::detail
