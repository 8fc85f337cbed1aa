#include "tmle/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tmle/error.hpp"

namespace tmle {

DensityField::DensityField(std::size_t dim, PointFunction eval, double lower_bound,
                           double upper_bound, int smoothness, std::string label)
    : dim_(dim),
      eval_(std::move(eval)),
      lower_(lower_bound),
      upper_(upper_bound),
      smoothness_(smoothness),
      label_(std::move(label)) {
  if (dim_ < 1) throw InputError("density dimension must be at least 1");
  if (!eval_) throw InputError("density needs an evaluation function");
  if (!(lower_ >= 0.0) || !(upper_ >= lower_)) {
    throw InputError("density bounds must satisfy 0 <= lower <= upper");
  }
}

DensityField DensityField::with_derivative(std::function<double(double)> derivative) const {
  if (dim_ != 1) throw InputError("only one-dimensional densities carry a derivative");
  DensityField out = *this;
  out.derivative_ = std::move(derivative);
  return out;
}

DensityField DensityField::as_uniform() const {
  DensityField out = *this;
  out.uniform_ = true;
  return out;
}

double DensityField::derivative(double x) const {
  if (uniform_) return 0.0;
  if (derivative_) return derivative_(x);
  if (dim_ != 1) throw InputError("derivative requested for a multivariate density");
  const double h = 1e-6;
  const double lo = std::max(0.0, x - h);
  const double hi = std::min(1.0, x + h);
  return ((*this)(hi) - (*this)(lo)) / (hi - lo);
}

Marginal::Marginal(DensityField density, std::size_t cdf_cells) : density_(std::move(density)) {
  if (density_.dim() != 1) throw InputError("a marginal must be one-dimensional");
  if (!density_.is_uniform()) {
    const DensityField& f = density_;
    table_ = std::make_shared<const CdfTable>([&f](double x) { return f(x); }, cdf_cells);
  }
}

double Marginal::cdf(double x) const {
  if (!table_) return std::clamp(x, 0.0, 1.0);
  return table_->cdf(x);
}

double Marginal::inverse_cdf(double u) const {
  if (!table_) {
    if (!(u >= 0.0 && u <= 1.0)) throw InversionError("CDF inverse requested outside [0,1]");
    return u;
  }
  return table_->inverse(u);
}

FactorizedDensity::FactorizedDensity(std::vector<Marginal> marginals)
    : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw InputError("factorized density needs at least one marginal");
}

bool FactorizedDensity::is_uniform() const {
  return std::all_of(marginals_.begin(), marginals_.end(),
                     [](const Marginal& m) { return m.is_uniform(); });
}

double FactorizedDensity::operator()(std::span<const double> x) const {
  double p = 1.0;
  for (std::size_t k = 0; k < marginals_.size(); ++k) p *= marginals_[k].pdf(x[k]);
  return p;
}

DensityField FactorizedDensity::as_field() const {
  double lo = 1.0;
  double hi = 1.0;
  int smooth = std::numeric_limits<int>::max();
  std::string label = "product(";
  for (std::size_t k = 0; k < marginals_.size(); ++k) {
    lo *= marginals_[k].density().lower_bound();
    hi *= marginals_[k].density().upper_bound();
    smooth = std::min(smooth, marginals_[k].density().smoothness());
    label += (k ? "," : "") + marginals_[k].density().label();
  }
  label += ")";
  auto self = std::make_shared<const FactorizedDensity>(*this);
  DensityField field(dim(), [self](std::span<const double> x) { return (*self)(x); }, lo, hi, smooth,
                     label);
  return is_uniform() ? field.as_uniform() : field;
}

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::uniform:
      return "uniform";
    case DensityKind::linear_tilt:
      return "linear-tilt";
    case DensityKind::cosine_bump:
      return "cosine-bump";
    case DensityKind::product_of_marginals:
      return "product-of-marginals";
    case DensityKind::nonproduct_coupling:
      return "nonproduct-coupling";
  }
  return "unknown";
}

DensityKind density_kind_from_string(const std::string& name) {
  std::string key = name;
  std::replace(key.begin(), key.end(), '_', '-');
  for (DensityKind k : {DensityKind::uniform, DensityKind::linear_tilt, DensityKind::cosine_bump,
                        DensityKind::product_of_marginals, DensityKind::nonproduct_coupling}) {
    if (to_string(k) == key) return k;
  }
  throw InputError("unknown density kind '" + name + "'");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// A one-dimensional factor from a product-type spec.
DensityField make_factor(const DensitySpec& spec) {
  switch (spec.kind) {
    case DensityKind::uniform:
      return DensityField(1, [](std::span<const double>) { return 1.0; }, 1.0, 1.0, spec.smoothness,
                          "uniform")
          .with_derivative([](double) { return 0.0; })
          .as_uniform();
    case DensityKind::linear_tilt: {
      const double a = spec.tilt;
      if (!(std::fabs(a) < 1.0)) throw InputError("linear-tilt needs |a| < 1 for positivity");
      if (1.0 - std::fabs(a) < spec.min_lower_bound) {
        throw InputError("linear-tilt lower bound " + std::to_string(1.0 - std::fabs(a)) +
                         " is below the positivity floor " + std::to_string(spec.min_lower_bound));
      }
      return DensityField(
                 1, [a](std::span<const double> x) { return 1.0 + a * (2.0 * x[0] - 1.0); },
                 1.0 - std::fabs(a), 1.0 + std::fabs(a), spec.smoothness, "linear-tilt")
          .with_derivative([a](double) { return 2.0 * a; });
    }
    case DensityKind::cosine_bump: {
      const double amp = spec.amplitude;
      const int freq = spec.frequency;
      if (!(std::fabs(amp) < 1.0)) throw InputError("cosine-bump needs |amplitude| < 1 for positivity");
      if (freq < 1) throw InputError("cosine-bump frequency must be a positive integer");
      if (1.0 - std::fabs(amp) < spec.min_lower_bound) {
        throw InputError("cosine-bump lower bound is below the positivity floor");
      }
      const double w = kTwoPi * freq;
      return DensityField(
                 1, [amp, w](std::span<const double> x) { return 1.0 + amp * std::cos(w * x[0]); },
                 1.0 - std::fabs(amp), 1.0 + std::fabs(amp), spec.smoothness, "cosine-bump")
          .with_derivative([amp, w](double x) { return -amp * w * std::sin(w * x); });
    }
    case DensityKind::product_of_marginals:
    case DensityKind::nonproduct_coupling:
      break;
  }
  throw InputError("density kind '" + to_string(spec.kind) + "' cannot be used as a 1-d factor");
}

std::vector<DensityField> product_factors(const DensitySpec& spec, std::size_t dim) {
  std::vector<DensityField> factors;
  if (spec.kind == DensityKind::product_of_marginals) {
    if (spec.marginals.size() != dim) {
      throw InputError("product-of-marginals lists " + std::to_string(spec.marginals.size()) +
                       " marginals for dimension " + std::to_string(dim));
    }
    for (const DensitySpec& m : spec.marginals) factors.push_back(make_factor(m));
  } else {
    for (std::size_t k = 0; k < dim; ++k) factors.push_back(make_factor(spec));
  }
  return factors;
}

}  // namespace

DensityField make_test_density(const DensitySpec& spec, std::size_t dim) {
  if (dim < 1) throw InputError("density dimension must be at least 1");
  if (spec.kind == DensityKind::nonproduct_coupling) {
    const double s = spec.strength;
    if (!(std::fabs(s) < 1.0)) throw InputError("nonproduct-coupling needs |strength| < 1 for positivity");
    if (1.0 - std::fabs(s) < spec.min_lower_bound) {
      throw InputError("nonproduct-coupling lower bound is below the positivity floor");
    }
    if (dim < 2) throw InputError("nonproduct-coupling needs dimension >= 2");
    return DensityField(
        dim,
        [s](std::span<const double> x) {
          double prod = 1.0;
          for (double xi : x) prod *= std::cos(kTwoPi * xi);
          return 1.0 + s * prod;
        },
        1.0 - std::fabs(s), 1.0 + std::fabs(s), spec.smoothness, "nonproduct-coupling");
  }
  auto product = std::make_shared<const FactorizedDensity>(make_factorized_density(spec, dim));
  double lo = 1.0;
  double hi = 1.0;
  for (const Marginal& m : product->marginals()) {
    lo *= m.density().lower_bound();
    hi *= m.density().upper_bound();
  }
  DensityField field(
      dim, [product](std::span<const double> x) { return (*product)(x); }, lo, hi, spec.smoothness,
      to_string(spec.kind));
  if (dim == 1) {
    field = field.with_derivative([product](double x) { return product->marginal(0).derivative(x); });
  }
  return product->is_uniform() ? field.as_uniform() : field;
}

FactorizedDensity make_factorized_density(const DensitySpec& spec, std::size_t dim) {
  if (spec.kind == DensityKind::nonproduct_coupling) {
    throw InputError("unsupported reference: nonproduct-coupling does not factorize");
  }
  std::vector<Marginal> marginals;
  for (DensityField& f : product_factors(spec, dim)) marginals.emplace_back(std::move(f));
  return FactorizedDensity(std::move(marginals));
}

FactorizedDensity uniform_reference(std::size_t dim) {
  return make_factorized_density(DensitySpec{}, dim);
}

double default_integral_tolerance(std::size_t dim) { return dim == 1 ? 1e-8 : 1e-5; }

ClassReport validate_class_membership(const DensityField& p, const GridSpec& grid,
                                      std::optional<double> integral_tolerance) {
  const TensorGrid nodes = make_tensor_grid(grid.with_dim(p.dim()));
  ClassReport report;
  report.min = std::numeric_limits<double>::infinity();
  report.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double v = p(nodes.point(i));
    report.min = std::min(report.min, v);
    report.max = std::max(report.max, v);
  }
  report.integral = integrate(p.function(), grid.with_dim(p.dim()));
  const double tol = integral_tolerance.value_or(default_integral_tolerance(p.dim()));
  report.below_lower = report.min < p.lower_bound();
  report.above_upper = report.max > p.upper_bound();
  report.not_normalized = std::fabs(report.integral - 1.0) > tol;
  return report;
}

}  // namespace tmle
