#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmle/cdf_table.hpp"
#include "tmle/quadrature.hpp"

namespace tmle {

// An evaluable probability density on Q_dim with declared bounds
// lower_bound <= p <= upper_bound. Immutable after construction and safe to
// share between threads.
class DensityField {
 public:
  DensityField(std::size_t dim, PointFunction eval, double lower_bound, double upper_bound,
               int smoothness = 2, std::string label = {});

  std::size_t dim() const { return dim_; }
  double operator()(std::span<const double> x) const { return eval_(x); }
  double operator()(double x) const { return eval_(std::span<const double>(&x, 1)); }
  const PointFunction& function() const { return eval_; }

  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }
  int smoothness() const { return smoothness_; }
  const std::string& label() const { return label_; }
  // True when the density is known to be identically 1 (enables fast paths).
  bool is_uniform() const { return uniform_; }

  // One-dimensional densities may carry an analytic derivative.
  DensityField with_derivative(std::function<double(double)> derivative) const;
  DensityField as_uniform() const;
  double derivative(double x) const;
  bool has_analytic_derivative() const { return static_cast<bool>(derivative_); }

 private:
  std::size_t dim_;
  PointFunction eval_;
  double lower_;
  double upper_;
  int smoothness_;
  std::string label_;
  std::function<double(double)> derivative_;
  bool uniform_ = false;
};

// A one-dimensional marginal with its tabulated CDF.
class Marginal {
 public:
  explicit Marginal(DensityField density, std::size_t cdf_cells = 512);

  const DensityField& density() const { return density_; }
  bool is_uniform() const { return density_.is_uniform(); }
  double pdf(double x) const { return density_(x); }
  double derivative(double x) const { return density_.derivative(x); }
  double cdf(double x) const;
  double inverse_cdf(double u) const;

 private:
  DensityField density_;
  std::shared_ptr<const CdfTable> table_;
};

// eta(x) = prod_k e_k(x_k).
class FactorizedDensity {
 public:
  explicit FactorizedDensity(std::vector<Marginal> marginals);

  std::size_t dim() const { return marginals_.size(); }
  const Marginal& marginal(std::size_t k) const { return marginals_.at(k); }
  const std::vector<Marginal>& marginals() const { return marginals_; }
  bool is_uniform() const;

  double operator()(std::span<const double> x) const;
  // The composite as a DensityField with bounds prod c_k <= eta <= prod B_k.
  DensityField as_field() const;

 private:
  std::vector<Marginal> marginals_;
};

enum class DensityKind { uniform, linear_tilt, cosine_bump, product_of_marginals, nonproduct_coupling };

struct DensitySpec {
  DensityKind kind = DensityKind::uniform;
  double tilt = 0.0;        // linear_tilt: e(x) = 1 + tilt*(2x - 1)
  double amplitude = 0.0;   // cosine_bump: e(x) = 1 + amplitude*cos(2*pi*frequency*x)
  int frequency = 1;
  double strength = 0.0;    // nonproduct_coupling: 1 + strength * prod_k cos(2*pi*x_k)
  std::vector<DensitySpec> marginals;  // product_of_marginals, one per axis
  int smoothness = 2;
  double min_lower_bound = 0.25;
};

std::string to_string(DensityKind kind);
DensityKind density_kind_from_string(const std::string& name);

// Builds a normalized synthetic density on Q_dim. Throws InputError when the
// parameters break positivity or push a factor below spec.min_lower_bound.
DensityField make_test_density(const DensitySpec& spec, std::size_t dim);
// Reference densities must factorize; nonproduct_coupling is rejected.
FactorizedDensity make_factorized_density(const DensitySpec& spec, std::size_t dim);
FactorizedDensity uniform_reference(std::size_t dim);

struct ClassReport {
  double min = 0.0;
  double max = 0.0;
  double integral = 0.0;
  bool below_lower = false;
  bool above_upper = false;
  bool not_normalized = false;

  bool ok() const { return !below_lower && !above_upper && !not_normalized; }
};

// Tolerance for the normalization check when none is given: 1e-8 for d=1,
// 1e-5 otherwise.
double default_integral_tolerance(std::size_t dim);

ClassReport validate_class_membership(const DensityField& p, const GridSpec& grid,
                                      std::optional<double> integral_tolerance = std::nullopt);

}  // namespace tmle
