#include "tmle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tmle/error.hpp"
#include "tmle/kernels.hpp"

namespace tmle {

namespace {

struct Tabulation {
  TensorGrid grid;
  std::vector<double> p;
  std::vector<double> q;
};

Tabulation tabulate(const DensityField& p, const DensityField& q, const GridSpec& spec) {
  if (p.dim() != q.dim()) throw InputError("densities have different dimensions");
  Tabulation t;
  t.grid = make_tensor_grid(spec.with_dim(p.dim()));
  t.p.resize(t.grid.size());
  t.q.resize(t.grid.size());
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    t.p[i] = p(t.grid.point(i));
    t.q[i] = q(t.grid.point(i));
  }
  return t;
}

void require_nonnegative(std::span<const double> v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) {
      std::ostringstream os;
      os << "density " << name << " is negative or NaN (" << v[i] << ") at node " << i;
      throw InputError(os.str());
    }
  }
}

double kl_tabulated(std::span<const double> w, std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(q[i] >= 1e-12)) {
      throw DomainError("KL divergence: second density below 1e-12 at node " + std::to_string(i));
    }
    const double term = p[i] > 0.0 ? p[i] * std::log(p[i] / q[i]) - p[i] + q[i] : q[i];
    s += w[i] * term;
  }
  return std::max(0.0, s);
}

}  // namespace

MetricsReport compare_tabulated(std::span<const double> weights, std::span<const double> p,
                                std::span<const double> q, const GridSpec& grid) {
  require_nonnegative(p, "p");
  require_nonnegative(q, "q");
  const auto& k = kernels::active();
  const std::size_t n = weights.size();
  MetricsReport r;
  r.grid = grid;
  r.hellinger = std::sqrt(std::max(0.0, k.hellinger_sq(weights.data(), p.data(), q.data(), n)));
  r.l2 = std::sqrt(std::max(0.0, k.sq_diff(weights.data(), p.data(), q.data(), n)));
  r.tv = k.abs_diff(weights.data(), p.data(), q.data(), n);
  r.kl = kl_tabulated(weights, p, q);
  return r;
}

MetricsReport compare_densities(const DensityField& p, const DensityField& q, const GridSpec& grid) {
  const Tabulation t = tabulate(p, q, grid);
  return compare_tabulated(t.grid.weights, t.p, t.q, grid.with_dim(p.dim()));
}

double hellinger(const DensityField& p, const DensityField& q, const GridSpec& grid) {
  const Tabulation t = tabulate(p, q, grid);
  require_nonnegative(t.p, "p");
  require_nonnegative(t.q, "q");
  const double s = kernels::active().hellinger_sq(t.grid.weights.data(), t.p.data(), t.q.data(), t.p.size());
  return std::sqrt(std::max(0.0, s));
}

double kl_divergence(const DensityField& p, const DensityField& q, const GridSpec& grid) {
  const Tabulation t = tabulate(p, q, grid);
  require_nonnegative(t.p, "p");
  return kl_tabulated(t.grid.weights, t.p, t.q);
}

double l2_distance(const DensityField& p, const DensityField& q, const GridSpec& grid) {
  const Tabulation t = tabulate(p, q, grid);
  const double s = kernels::active().sq_diff(t.grid.weights.data(), t.p.data(), t.q.data(), t.p.size());
  return std::sqrt(std::max(0.0, s));
}

double tv_distance(const DensityField& p, const DensityField& q, const GridSpec& grid) {
  const Tabulation t = tabulate(p, q, grid);
  return kernels::active().abs_diff(t.grid.weights.data(), t.p.data(), t.q.data(), t.p.size());
}

double h1diag_map_distance(const TriangularMap& s, const TriangularMap& t, const GridSpec& grid) {
  if (s.dim() != t.dim()) throw InputError("h1diag: maps have different dimensions");
  double total = 0.0;
  for (std::size_t k = 0; k < s.dim(); ++k) {
    const TensorGrid g = make_tensor_grid(grid.with_dim(k + 1));
    std::vector<double> sv(g.size());
    std::vector<double> tv(g.size());
    std::vector<double> sp(g.size());
    std::vector<double> tp(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.point(i);
      sv[i] = s.component(k, x);
      tv[i] = t.component(k, x);
      sp[i] = s.diagonal_partial(k, x);
      tp[i] = t.diagonal_partial(k, x);
    }
    const auto& kt = kernels::active();
    total += kt.sq_diff(g.weights.data(), sv.data(), tv.data(), g.size());
    total += kt.sq_diff(g.weights.data(), sp.data(), tp.data(), g.size());
  }
  return std::sqrt(std::max(0.0, total));
}

RateFit rate_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw InputError("rate_fit needs at least 3 points");
  double mx = 0.0;
  double my = 0.0;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [n, err] : points) {
    if (!(err > 0.0)) throw InputError("rate_fit: errors must be positive (got " + std::to_string(err) + ")");
    if (!(n > 0.0)) throw InputError("rate_fit: sample sizes must be positive");
    xs.push_back(std::log(n));
    ys.push_back(std::log(err));
    mx += xs.back();
    my += ys.back();
  }
  const double m = static_cast<double>(points.size());
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("rate_fit: all sample sizes are equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

}  // namespace tmle
