#include "tmle/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "tmle/error.hpp"
#include "tmle/kernels.hpp"

namespace tmle {

GridSpec GridSpec::trapezoid(std::size_t dim, std::size_t nodes_per_axis) {
  GridSpec g;
  g.dim = dim;
  g.nodes_per_axis = nodes_per_axis;
  g.rule = QuadratureRule::trapezoid;
  g.validate();
  return g;
}

GridSpec GridSpec::gauss_legendre(std::size_t dim, std::size_t panels, std::size_t order) {
  GridSpec g;
  g.dim = dim;
  g.rule = QuadratureRule::gauss_legendre;
  g.panels = panels;
  g.order = order;
  g.nodes_per_axis = panels * order;
  g.validate();
  return g;
}

GridSpec GridSpec::default_for(std::size_t dim) {
  switch (dim) {
    case 1:
      return trapezoid(1, 513);
    case 2:
      return trapezoid(2, 129);
    case 3:
      return trapezoid(3, 33);
    default:
      return trapezoid(dim, 17);
  }
}

std::size_t GridSpec::total_nodes() const {
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    if (nodes_per_axis != 0 && total > kMaxNodes / nodes_per_axis) return kMaxNodes + 1;
    total *= nodes_per_axis;
  }
  return total;
}

void GridSpec::validate() const {
  if (dim < 1) throw InputError("grid dimension must be at least 1");
  if (rule == QuadratureRule::gauss_legendre) {
    if (panels < 1 || order < 1) throw InputError("gauss-legendre grid needs panels >= 1 and order >= 1");
    if (nodes_per_axis != panels * order) throw InputError("gauss-legendre nodes_per_axis must equal panels*order");
  } else if (nodes_per_axis < 2) {
    throw InputError("trapezoid grid needs nodes_per_axis >= 2");
  }
  if (total_nodes() > kMaxNodes) {
    throw InputError("grid has " + std::to_string(nodes_per_axis) + "^" + std::to_string(dim) +
                     " nodes, above the budget of " + std::to_string(kMaxNodes));
  }
}

GridSpec GridSpec::with_dim(std::size_t new_dim) const {
  GridSpec g = *this;
  g.dim = new_dim;
  g.validate();
  return g;
}

AxisRule gauss_legendre(std::size_t order, double a, double b) {
  if (order < 1) throw InputError("gauss-legendre order must be >= 1");
  AxisRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const std::size_t n = order;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  if (n == 1) {
    rule.nodes[0] = mid;
    rule.weights[0] = b - a;
    return rule;
  }
  // Newton on P_n from the Tricomi initial guesses; nodes come out ascending.
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk =
            ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
            static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

AxisRule composite_gauss_legendre(std::size_t panels, std::size_t order, double a, double b) {
  if (panels < 1) throw InputError("composite rule needs at least one panel");
  const AxisRule unit = gauss_legendre(order, 0.0, 1.0);
  AxisRule rule;
  rule.nodes.reserve(panels * order);
  rule.weights.reserve(panels * order);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double left = a + h * static_cast<double>(p);
    for (std::size_t i = 0; i < order; ++i) {
      rule.nodes.push_back(left + h * unit.nodes[i]);
      rule.weights.push_back(h * unit.weights[i]);
    }
  }
  return rule;
}

AxisRule axis_rule(const GridSpec& grid) {
  grid.validate();
  if (grid.rule == QuadratureRule::gauss_legendre) {
    return composite_gauss_legendre(grid.panels, grid.order);
  }
  const std::size_t n = grid.nodes_per_axis;
  AxisRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double h = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = static_cast<double>(i) * h;
    rule.weights[i] = h;
  }
  rule.nodes[n - 1] = 1.0;
  rule.weights.front() = 0.5 * h;
  rule.weights.back() = 0.5 * h;
  return rule;
}

namespace {

[[noreturn]] void throw_non_finite(std::span<const double> x, double value) {
  std::ostringstream os;
  os.precision(17);
  os << "integrand is not finite (" << value << ") at node (";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  throw NumericalError(os.str());
}

double nested_sum(const PointFunction& f, const AxisRule& rule, std::vector<double>& point,
                  std::size_t axis, std::vector<std::vector<double>>& scratch) {
  const std::size_t n = rule.nodes.size();
  std::vector<double>& values = scratch[axis];
  for (std::size_t i = 0; i < n; ++i) {
    point[axis] = rule.nodes[i];
    if (axis + 1 == point.size()) {
      const double v = f(point);
      if (!std::isfinite(v)) throw_non_finite(point, v);
      values[i] = v;
    } else {
      values[i] = nested_sum(f, rule, point, axis + 1, scratch);
    }
  }
  return kernels::dot(rule.weights, values);
}

}  // namespace

double integrate(const PointFunction& f, const GridSpec& grid) {
  const AxisRule rule = axis_rule(grid);
  std::vector<double> point(grid.dim, 0.0);
  std::vector<std::vector<double>> scratch(grid.dim, std::vector<double>(rule.nodes.size()));
  return nested_sum(f, rule, point, 0, scratch);
}

TensorGrid make_tensor_grid(const GridSpec& grid) {
  const AxisRule rule = axis_rule(grid);
  const std::size_t n = rule.nodes.size();
  const std::size_t total = grid.total_nodes();
  TensorGrid out;
  out.dim = grid.dim;
  out.points.resize(total * grid.dim);
  out.weights.resize(total);
  std::vector<std::size_t> idx(grid.dim, 0);
  for (std::size_t t = 0; t < total; ++t) {
    double w = 1.0;
    for (std::size_t a = 0; a < grid.dim; ++a) {
      out.points[t * grid.dim + a] = rule.nodes[idx[a]];
      w *= rule.weights[idx[a]];
    }
    out.weights[t] = w;
    for (std::size_t a = grid.dim; a-- > 0;) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace tmle
