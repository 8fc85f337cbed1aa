#include "tmle/rational_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slice.hpp"
#include "tmle/error.hpp"
#include "tmle/kernels.hpp"

namespace tmle {

// ---------------------------------------------------------------------------
// Theta

Theta::Theta(std::shared_ptr<const WaveletBasis> basis, double alpha) : basis_(std::move(basis)), alpha_(alpha) {
  if (!basis_) throw InputError("Theta needs a basis");
  if (!(alpha_ >= 0.0)) throw InputError("Theta smoothness alpha must be non-negative");
  values_.assign(basis_->total_size(), 0.0);
}

std::span<double> Theta::component(std::size_t k) {
  const std::size_t a = basis_->component_offset(k);
  return std::span<double>(values_).subspan(a, basis_->component_offset(k + 1) - a);
}

std::span<const double> Theta::component(std::size_t k) const {
  const std::size_t a = basis_->component_offset(k);
  return std::span<const double>(values_).subspan(a, basis_->component_offset(k + 1) - a);
}

double& Theta::at(std::size_t k, int level, std::size_t m) {
  return values_[basis_->component_offset(k) + basis_->flat_index(k, level, m)];
}

double Theta::at(std::size_t k, int level, std::size_t m) const {
  return values_[basis_->component_offset(k) + basis_->flat_index(k, level, m)];
}

std::vector<double> penalty_weights(const WaveletBasis& basis, double alpha) {
  std::vector<double> w(basis.total_size());
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const std::size_t base = basis.component_offset(k);
    for (int l = 0; l <= basis.max_level(); ++l) {
      const double wl = std::exp2(2.0 * l * alpha);
      const std::size_t off = basis.level_offset(k, l);
      for (std::size_t i = 0; i < basis.level_size(k, l); ++i) w[base + off + i] = wl;
    }
  }
  return w;
}

double b_alpha_norm(const Theta& theta, double alpha) {
  const std::vector<double> w = penalty_weights(theta.basis(), alpha);
  const auto v = theta.values();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i] * v[i];
  return std::sqrt(s);
}

double b_alpha_norm(const Theta& theta) { return b_alpha_norm(theta, theta.alpha()); }

// ---------------------------------------------------------------------------
// Panels and fibres

PanelLayout::PanelLayout(std::size_t panels_, std::size_t order_) : panels(panels_), order(order_) {
  if (panels < 1 || order < 1) throw InputError("panel layout needs panels >= 1 and order >= 1");
  const AxisRule unit = gauss_legendre(order, 0.0, 1.0);
  unit_nodes = unit.nodes;
  unit_weights = unit.weights;
  // Nudge the middle weight until the in-order sum is exactly 1, so that a
  // constant integrand gives denominator 1 and diagonal partial 1.
  for (int pass = 0; pass < 4; ++pass) {
    double s = 0.0;
    for (double w : unit_weights) s += w;
    if (s == 1.0) break;
    unit_weights[order / 2] += 1.0 - s;
  }
  const AxisRule all = composite_gauss_legendre(panels, order);
  nodes = all.nodes;
  weights.resize(nodes.size());
  const double h = width();
  for (std::size_t p = 0; p < panels; ++p) {
    for (std::size_t q = 0; q < order; ++q) weights[p * order + q] = unit_weights[q] * h;
  }
}

PanelLayout wavelet_panel_layout(const WaveletBasis& basis, std::size_t order) {
  return PanelLayout(std::size_t{1} << (basis.max_level() + 1), order);
}

namespace detail {

NodeTable::NodeTable(const WaveletBasis& basis, std::size_t order)
    : basis_(&basis), layout_(wavelet_panel_layout(basis, order)) {
  const std::size_t n = layout_.nodes.size();
  const std::size_t m = basis.catalog_size();
  values_.assign(m * n, 0.0);
  lo_.assign(m, n);
  hi_.assign(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    basis.for_each_active(layout_.nodes[i], [&](std::size_t b, double v) {
      if (v == 0.0) return;
      values_[b * n + i] = v;
      lo_[b] = std::min(lo_[b], i);
      hi_[b] = std::max(hi_[b], i + 1);
    });
  }
  for (std::size_t b = 0; b < m; ++b) {
    if (lo_[b] >= hi_[b]) lo_[b] = hi_[b] = 0;
  }
}

std::size_t panel_of(const PanelLayout& layout, double x) {
  const auto p = static_cast<std::size_t>(x * static_cast<double>(layout.panels));
  return std::min(p, layout.panels - 1);
}

void collapse_coefficients(const WaveletBasis& basis, std::span<const double> theta, std::size_t k,
                           std::span<const double> prefix, std::vector<WaveletBasis::CollapsedGroup>& groups,
                           Slice& slice) {
  basis.collapse(k, prefix, groups);
  slice.coeffs.assign(basis.catalog_size(), 0.0);
  for (const auto& g : groups) {
    kernels::axpy(g.weight, theta.subspan(g.theta_offset, g.count),
                  std::span<double>(slice.coeffs).subspan(g.catalog_offset, g.count));
  }
}

void finish(const PanelLayout& layout, const LinkFunction& link, Slice& slice) {
  const std::size_t n = layout.nodes.size();
  slice.phi.resize(n);
  slice.dphi.resize(n);
  slice.wphi.resize(n);
  slice.wdphi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    link.phi_and_prime(slice.f[i], slice.phi[i], slice.dphi[i]);
    slice.wphi[i] = layout.weights[i] * slice.phi[i];
    slice.wdphi[i] = layout.weights[i] * slice.dphi[i];
  }
  slice.panel_cum.resize(layout.panels + 1);
  slice.panel_cum[0] = 0.0;
  for (std::size_t p = 0; p < layout.panels; ++p) {
    double s = 0.0;
    for (std::size_t q = 0; q < layout.order; ++q) s += slice.wphi[p * layout.order + q];
    slice.panel_cum[p + 1] = slice.panel_cum[p] + s;
  }
  slice.denominator = slice.panel_cum.back();
}

void fill_from_coefficients(const NodeTable& table, const LinkFunction& link, Slice& slice) {
  const std::size_t n = table.nodes();
  slice.f.assign(n, 0.0);
  for (std::size_t b = 0; b < slice.coeffs.size(); ++b) {
    const double c = slice.coeffs[b];
    if (c == 0.0) continue;
    const std::size_t lo = table.row_begin(b);
    const std::size_t hi = table.row_end(b);
    if (lo >= hi) continue;
    kernels::axpy(c, table.row(b).subspan(lo, hi - lo), std::span<double>(slice.f).subspan(lo, hi - lo));
  }
  finish(table.layout(), link, slice);
}

double collapsed_value(const WaveletBasis& basis, std::span<const double> coeffs, double y) {
  double s = 0.0;
  basis.for_each_active(y, [&](std::size_t b, double v) { s += coeffs[b] * v; });
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RationalTriangularMap

struct RationalTriangularMap::SliceValues {
  detail::Slice slice;
  std::vector<WaveletBasis::CollapsedGroup> groups;
  std::vector<double> point;
};

RationalTriangularMap::RationalTriangularMap(Theta theta, LinkFunction link, std::size_t quadrature_order)
    : dim_(theta.dim()), link_(link), theta_(std::make_shared<const Theta>(std::move(theta))) {
  table_ = std::make_shared<const detail::NodeTable>(theta_->basis(), quadrature_order);
  layout_ = std::shared_ptr<const PanelLayout>(table_, &table_->layout());
}

RationalTriangularMap::RationalTriangularMap(std::vector<PointFunction> functions, LinkFunction link,
                                             std::size_t panels, std::size_t quadrature_order)
    : dim_(functions.size()),
      link_(link),
      functions_(std::move(functions)),
      layout_(std::make_shared<const PanelLayout>(panels, quadrature_order)) {
  if (dim_ == 0) throw InputError("rational map needs at least one component function");
  for (const auto& f : functions_) {
    if (!f) throw InputError("rational map component function is empty");
  }
}

void RationalTriangularMap::fill_slice(std::size_t k, std::span<const double> prefix, SliceValues& s) const {
  if (theta_) {
    detail::collapse_coefficients(theta_->basis(), theta_->values(), k, prefix, s.groups, s.slice);
    detail::fill_from_coefficients(*table_, link_, s.slice);
    return;
  }
  const std::size_t n = layout_->nodes.size();
  s.point.assign(prefix.begin(), prefix.end());
  s.point.push_back(0.0);
  s.slice.f.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.point.back() = layout_->nodes[i];
    s.slice.f[i] = functions_[k](s.point);
  }
  detail::finish(*layout_, link_, s.slice);
}

double RationalTriangularMap::parameter(std::size_t k, std::span<const double> x) const {
  if (k >= dim_) throw InputError("rational map component out of range");
  if (theta_) {
    const std::size_t a = theta_->basis().component_offset(k);
    return theta_->basis().expand(k, theta_->values().subspan(a, theta_->basis().size(k)), x.first(k + 1));
  }
  return functions_[k](x.first(k + 1));
}

double RationalTriangularMap::normalizer(std::size_t k, std::span<const double> prefix) const {
  SliceValues s;
  fill_slice(k, prefix.first(k), s);
  return s.slice.denominator;
}

double RationalTriangularMap::component(std::size_t k, std::span<const double> x) const {
  if (k >= dim_) throw InputError("rational map component out of range");
  const double xk = std::clamp(x[k], 0.0, 1.0);
  if (xk <= 0.0) return 0.0;
  SliceValues s;
  fill_slice(k, x.first(k), s);
  if (xk >= 1.0) return 1.0;
  double num = 0.0;
  if (theta_) {
    const auto& coeffs = s.slice.coeffs;
    const WaveletBasis& basis = theta_->basis();
    num = detail::numerator(*layout_, link_, s.slice, xk,
                            [&](double y) { return detail::collapsed_value(basis, coeffs, y); });
  } else {
    std::vector<double> point(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k + 1));
    num = detail::numerator(*layout_, link_, s.slice, xk, [&](double y) {
      point[k] = y;
      return functions_[k](point);
    });
  }
  return std::min(1.0, num / s.slice.denominator);
}

double RationalTriangularMap::diagonal_partial(std::size_t k, std::span<const double> x) const {
  if (k >= dim_) throw InputError("rational map component out of range");
  SliceValues s;
  fill_slice(k, x.first(k), s);
  const double f = theta_ ? detail::collapsed_value(theta_->basis(), s.slice.coeffs, x[k]) : functions_[k](x.first(k + 1));
  return link_.phi(f) / s.slice.denominator;
}

// ---------------------------------------------------------------------------

std::vector<PointFunction> natural_parameter(TriangularMapPtr map, const LinkFunction& link,
                                             std::size_t probe_points) {
  if (!map) throw InputError("natural_parameter: null map");
  const std::size_t d = map->dim();
  for (std::size_t k = 0; k < d; ++k) {
    const TensorGrid probe = make_tensor_grid(GridSpec::trapezoid(k + 1, std::max<std::size_t>(probe_points, 2)));
    for (std::size_t i = 0; i < probe.size(); ++i) {
      const double v = map->diagonal_partial(k, probe.point(i));
      if (!(v > link.k_min() && v < link.k_max())) {
        throw DomainError("diagonal partial " + std::to_string(v) + " of component " + std::to_string(k) +
                          " leaves the link range (" + std::to_string(link.k_min()) + ", " +
                          std::to_string(link.k_max()) + "); use a larger (k_min, k_max)");
      }
    }
  }
  std::vector<PointFunction> out;
  for (std::size_t k = 0; k < d; ++k) {
    out.emplace_back([map, link, k](std::span<const double> x) {
      return link.phi_inverse(map->diagonal_partial(k, x.first(k + 1)));
    });
  }
  return out;
}

std::vector<double> project_onto_basis(const WaveletBasis& basis, std::size_t k, const PointFunction& f,
                                       std::size_t order) {
  const std::size_t panels = std::size_t{1} << (basis.max_level() + 1);
  const TensorGrid grid = make_tensor_grid(GridSpec::gauss_legendre(k + 1, panels, order));
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = grid.weights[i] * f(grid.point(i));
  std::vector<double> coeffs(basis.size(k), 0.0);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (values[i] != 0.0) s += values[i] * basis.eval(k, j, grid.point(i));
    }
    coeffs[j] = s;
  }
  return coeffs;
}

namespace {

double c1diag_impl(const TriangularMap& s, const TriangularMap* t, const GridSpec& probe) {
  const std::size_t d = s.dim();
  if (t && t->dim() != d) throw InputError("c1diag: maps have different dimensions");
  double total = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const TensorGrid grid = make_tensor_grid(probe.with_dim(k + 1));
    double sup_value = 0.0;
    double sup_partial = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto x = grid.point(i);
      double dv = s.component(k, x);
      double dp = s.diagonal_partial(k, x);
      if (t) {
        dv -= t->component(k, x);
        dp -= t->diagonal_partial(k, x);
      }
      sup_value = std::max(sup_value, std::fabs(dv));
      sup_partial = std::max(sup_partial, std::fabs(dp));
    }
    total += sup_value + sup_partial;
  }
  return total;
}

}  // namespace

double c1diag_distance(const TriangularMap& s, const TriangularMap& t, const GridSpec& probe) {
  return c1diag_impl(s, &t, probe);
}

double c1diag_norm(const TriangularMap& s, const GridSpec& probe) { return c1diag_impl(s, nullptr, probe); }

}  // namespace tmle
