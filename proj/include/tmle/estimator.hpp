#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmle/density.hpp"
#include "tmle/kr_map.hpp"
#include "tmle/link.hpp"
#include "tmle/rational_map.hpp"
#include "tmle/wavelet.hpp"

namespace tmle {

struct LinkSpec {
  double k_min = 0.25;
  double k_max = 4.0;
  // Calibrated links satisfy Phi(0) = 1; plain logistic otherwise.
  bool calibrated = true;

  LinkFunction make() const {
    return calibrated ? LinkFunction::calibrated(k_min, k_max) : LinkFunction::logistic(k_min, k_max);
  }
};

struct OptimizerSettings {
  int max_iters = 1000;
  // <= 0 selects 1e-6 * max(1, |objective at the initial theta|).
  double gradient_tolerance = 0.0;
  int memory = 10;
  bool record_trace = false;
};

struct FitConfig {
  double alpha = 2.0;
  double lambda = 0.0;
  int max_level = 0;
  WaveletFamily family = WaveletFamily::haar;
  LinkSpec link{};
  OptimizerSettings optimizer{};
  std::size_t quadrature_order = 8;
  // Flat initial coefficients; zeros (the identity map) when absent.
  std::optional<std::vector<double>> initial;

  void validate() const;
};

struct FitResult {
  Theta theta_hat;
  double objective_value = 0.0;
  double initial_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm_final = 0.0;
  std::string termination;
  std::vector<double> objective_trace;
};

struct Schedule {
  double lambda = 1.0;
  int max_level = 0;
};

// lambda = N^{-alpha/(2 alpha + d)}, J = ceil(log2(N^{1/(2 alpha + d)})).
Schedule tuning_schedule(std::size_t n, double alpha, std::size_t dim);

// Copies data into the open cube: coordinates exactly 0 or 1 move inward by
// 1e-12. Throws InputError for points outside [0,1]^d.
SampleSet prepare_data(const SampleSet& data);

// The penalized negative log-likelihood
//   J(theta) = -(1/N) sum_i log[eta(S_theta(X_i)) det grad S_theta(X_i)] + lambda^2 ||theta||^2_{b^alpha_22}
// with its analytic gradient. Value and gradient are produced in the same
// pass, sharing the per-sample normalizing integrals. Samples are processed
// in fixed blocks of 256 and reduced in block order.
class LikelihoodObjective {
 public:
  LikelihoodObjective(SampleSet data, FactorizedDensity reference, LinkFunction link,
                      std::shared_ptr<const WaveletBasis> basis, double alpha, double lambda,
                      std::size_t quadrature_order = 8);
  ~LikelihoodObjective();
  LikelihoodObjective(LikelihoodObjective&&) noexcept;

  std::size_t num_parameters() const;
  std::size_t num_samples() const { return data_.size(); }
  const WaveletBasis& basis() const { return *basis_; }
  const std::shared_ptr<const WaveletBasis>& basis_ptr() const { return basis_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  const LinkFunction& link() const { return link_; }
  const FactorizedDensity& reference() const { return reference_; }

  // Data term only; gradient written when `gradient` is non-empty.
  double negative_log_likelihood(std::span<const double> theta, std::span<double> gradient = {}) const;
  // lambda^2 ||theta||^2 and its gradient (added into `gradient` when non-empty).
  double penalty(std::span<const double> theta, std::span<double> gradient = {}) const;
  double evaluate(std::span<const double> theta, std::span<double> gradient = {}) const;

 private:
  struct Impl;
  SampleSet data_;
  FactorizedDensity reference_;
  LinkFunction link_;
  std::shared_ptr<const WaveletBasis> basis_;
  double alpha_;
  double lambda_;
  std::vector<double> penalty_weights_;
  std::unique_ptr<Impl> impl_;
};

std::shared_ptr<const WaveletBasis> make_basis(const FitConfig& config, std::size_t dim);

double negative_log_likelihood(const Theta& theta, const SampleSet& data, const FactorizedDensity& reference,
                               const LinkFunction& link, std::size_t quadrature_order = 8);
double objective(const Theta& theta, const SampleSet& data, const FactorizedDensity& reference,
                 const FitConfig& config);
std::vector<double> gradient(const Theta& theta, const SampleSet& data, const FactorizedDensity& reference,
                             const FitConfig& config);

// Limited-memory quasi-Newton minimization of the objective from the initial
// theta. Non-convergence within max_iters is reported through
// FitResult::converged, not thrown.
FitResult fit(const SampleSet& data, const FactorizedDensity& reference, const FitConfig& config);

// Map induced by a fitted theta.
std::shared_ptr<const RationalTriangularMap> fitted_map(const Theta& theta, const FitConfig& config);

// tau^2 = h^2(S_theta^# eta, p) + lambda^2 ||theta||^2_{b^alpha_22}.
double tau_squared(const Theta& theta, const LinkFunction& link, const DensityField& truth,
                   const FactorizedDensity& reference, double lambda, double alpha, const GridSpec& grid,
                   std::size_t quadrature_order = 8);

}  // namespace tmle
