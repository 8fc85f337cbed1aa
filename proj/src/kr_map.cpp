#include "tmle/kr_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "tmle/error.hpp"
#include "tmle/parallel.hpp"
#include "tmle/quadrature.hpp"

namespace tmle {

namespace {

// Integrates nu(prefix, y) over y in Q_tail with a tensor composite rule.
class TailIntegrator {
 public:
  TailIntegrator(std::size_t tail_dims, MarginalizationRule rule) : tail_dims_(tail_dims) {
    if (tail_dims_ > 0) {
      grid_ = make_tensor_grid(GridSpec::gauss_legendre(tail_dims_, rule.panels, rule.order));
    }
  }

  double operator()(const DensityField& nu, std::span<const double> prefix,
                    std::vector<double>& scratch) const {
    const std::size_t k = prefix.size();
    scratch.resize(k + tail_dims_);
    std::copy(prefix.begin(), prefix.end(), scratch.begin());
    if (tail_dims_ == 0) return nu(std::span<const double>(scratch));
    double sum = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const auto y = grid_.point(i);
      std::copy(y.begin(), y.end(), scratch.begin() + static_cast<std::ptrdiff_t>(k));
      sum += grid_.weights[i] * nu(std::span<const double>(scratch));
    }
    return sum;
  }

 private:
  std::size_t tail_dims_;
  TensorGrid grid_;
};

void check_order(const DensityField& nu, std::size_t order, std::size_t min_order) {
  if (order < min_order || order > nu.dim()) {
    throw InputError("component order " + std::to_string(order) + " out of range [" +
                     std::to_string(min_order) + ", " + std::to_string(nu.dim()) + "]");
  }
}

// Local cubic Lagrange stencil on a uniform grid of n >= 2 points over [0,1].
struct Stencil {
  std::size_t start = 0;
  std::size_t size = 0;
  std::array<double, 4> weights{};
};

Stencil lagrange_stencil(double u, std::size_t n) {
  Stencil st;
  const double h = 1.0 / static_cast<double>(n - 1);
  u = std::clamp(u, 0.0, 1.0);
  st.size = std::min<std::size_t>(4, n);
  const auto cell = std::min<std::size_t>(static_cast<std::size_t>(u / h), n - 2);
  if (st.size == 4) {
    st.start = cell == 0 ? 0 : std::min(cell - 1, n - 4);
  } else {
    st.start = n == 2 ? 0 : std::min(cell, n - st.size);
  }
  for (std::size_t a = 0; a < st.size; ++a) {
    const double xa = h * static_cast<double>(st.start + a);
    double w = 1.0;
    for (std::size_t b = 0; b < st.size; ++b) {
      if (b == a) continue;
      const double xb = h * static_cast<double>(st.start + b);
      w *= (u - xb) / (xa - xb);
    }
    st.weights[a] = w;
  }
  return st;
}

}  // namespace

PointFunction marginal_density(const DensityField& nu, std::size_t order, MarginalizationRule rule) {
  check_order(nu, order, 0);
  if (order == 0) return [](std::span<const double>) { return 1.0; };
  auto tail = std::make_shared<const TailIntegrator>(nu.dim() - order, rule);
  return [nu, tail, order](std::span<const double> x) {
    std::vector<double> scratch;
    return (*tail)(nu, x.first(order), scratch);
  };
}

PointFunction conditional_density(const DensityField& nu, std::size_t order, MarginalizationRule rule) {
  check_order(nu, order, 1);
  PointFunction num = marginal_density(nu, order, rule);
  PointFunction den = marginal_density(nu, order - 1, rule);
  return [num, den, order](std::span<const double> x) {
    const double denominator = den(x.first(order - 1));
    if (!(denominator >= 1e-12)) {
      throw NumericalError("conditional density: marginal below 1e-12 at the conditioning point");
    }
    return num(x.first(order)) / denominator;
  };
}

double conditional_cdf(const DensityField& nu, std::size_t order, std::span<const double> prefix,
                       double x_k, MarginalizationRule rule) {
  check_order(nu, order, 1);
  if (prefix.size() + 1 != order) throw InputError("conditional_cdf: prefix must hold order-1 coordinates");
  if (!(x_k >= 0.0 && x_k <= 1.0)) throw InputError("conditional_cdf: x_k outside [0,1]");
  const TailIntegrator tail(nu.dim() - order, rule);
  std::vector<double> point(prefix.begin(), prefix.end());
  point.push_back(0.0);
  std::vector<double> scratch;
  auto mass = [&](double upper) {
    if (upper <= 0.0) return 0.0;
    const AxisRule r = composite_gauss_legendre(64, 8, 0.0, upper);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      point.back() = r.nodes[i];
      s += r.weights[i] * tail(nu, point, scratch);
    }
    return s;
  };
  const double total = mass(1.0);
  if (!(total >= 1e-12)) throw NumericalError("conditional_cdf: marginal below 1e-12");
  if (x_k >= 1.0) return 1.0;
  return mass(x_k) / total;
}

std::shared_ptr<const KrMap> KrMap::build(const DensityField& target, const FactorizedDensity& reference,
                                          KrOptions options) {
  const std::size_t d = target.dim();
  if (reference.dim() != d) {
    throw InputError("reference dimension " + std::to_string(reference.dim()) +
                     " does not match target dimension " + std::to_string(d));
  }
  std::size_t g = options.conditioning_points;
  if (g == 0) g = d <= 2 ? 65 : 17;
  if (g < 2) throw InputError("KR map needs at least 2 conditioning points per axis");
  std::shared_ptr<KrMap> map(new KrMap(reference, g));
  map->components_.resize(d);
  const double h = 1.0 / static_cast<double>(g - 1);
  for (std::size_t k = 0; k < d; ++k) {
    const TailIntegrator tail(d - k - 1, options.marginalization);
    std::size_t count = 1;
    for (std::size_t a = 0; a < k; ++a) count *= g;
    std::vector<CdfTable>& tables = map->components_[k].tables;
    tables.resize(count);
    parallel_blocks(count, [&](std::size_t idx) {
      std::vector<double> point(k + 1, 0.0);
      std::size_t rem = idx;
      for (std::size_t a = k; a-- > 0;) {
        point[a] = std::min(1.0, h * static_cast<double>(rem % g));
        rem /= g;
      }
      std::vector<double> scratch;
      auto slice = [&](double t) {
        std::vector<double> p = point;
        p[k] = t;
        return tail(target, p, scratch);
      };
      try {
        tables[idx] = CdfTable(slice, options.cdf_cells, options.panel_order);
      } catch (const NumericalError& e) {
        std::ostringstream os;
        os << "KR build failed for component " << k << " at conditioning index " << idx << ": " << e.what();
        throw NumericalError(os.str());
      }
    });
  }
  return map;
}

template <class Fn>
double KrMap::blend(std::size_t k, std::span<const double> x, Fn&& per_table) const {
  const auto& tables = components_.at(k).tables;
  if (k == 0) return per_table(tables[0]);
  std::array<Stencil, 8> stencils{};
  if (k > stencils.size()) throw InputError("KR map supports at most 9 dimensions");
  for (std::size_t a = 0; a < k; ++a) stencils[a] = lagrange_stencil(x[a], grid_points_);
  std::array<std::size_t, 8> pos{};
  double sum = 0.0;
  for (;;) {
    std::size_t idx = 0;
    double w = 1.0;
    for (std::size_t a = 0; a < k; ++a) {
      idx = idx * grid_points_ + stencils[a].start + pos[a];
      w *= stencils[a].weights[pos[a]];
    }
    sum += w * per_table(tables[idx]);
    bool carry = true;
    for (std::size_t a = k; carry && a-- > 0;) {
      if (++pos[a] < stencils[a].size) {
        carry = false;
      } else {
        pos[a] = 0;
      }
    }
    if (carry) break;
  }
  return sum;
}

double KrMap::target_cdf(std::size_t k, std::span<const double> x) const {
  const double xk = x[k];
  return std::clamp(blend(k, x, [xk](const CdfTable& t) { return t.cdf(xk); }), 0.0, 1.0);
}

double KrMap::component(std::size_t k, std::span<const double> x) const {
  return reference_.marginal(k).inverse_cdf(target_cdf(k, x));
}

double KrMap::diagonal_partial(std::size_t k, std::span<const double> x) const {
  const double xk = x[k];
  const double density = blend(k, x, [xk](const CdfTable& t) { return t.pdf(xk); });
  const Marginal& ref = reference_.marginal(k);
  if (ref.is_uniform()) return density;
  return density / ref.pdf(component(k, x));
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

SampleSet sample_reference(const FactorizedDensity& reference, std::size_t count, std::uint64_t seed) {
  SampleSet out;
  out.dim = reference.dim();
  out.points.resize(count * out.dim);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < out.dim; ++k) {
      out.points[i * out.dim + k] = reference.marginal(k).inverse_cdf(unit_uniform(rng()));
    }
  }
  return out;
}

SampleSet sample_target(const TriangularMap& map, const FactorizedDensity& reference, std::size_t count,
                        std::uint64_t seed) {
  if (map.dim() != reference.dim()) throw InputError("sample_target: map and reference dimensions differ");
  SampleSet z = sample_reference(reference, count, seed);
  SampleSet x;
  x.dim = z.dim;
  x.points.resize(z.points.size());
  constexpr std::size_t kBlock = 512;
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  parallel_blocks(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(count, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const std::vector<double> xi = invert_triangular(map, z.point(i));
      std::copy(xi.begin(), xi.end(), x.points.begin() + static_cast<std::ptrdiff_t>(i * x.dim));
    }
  });
  return x;
}

}  // namespace tmle
