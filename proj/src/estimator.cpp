#include "tmle/estimator.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <cmath>

#include "slice.hpp"
#include "tmle/error.hpp"
#include "tmle/kernels.hpp"
#include "tmle/metrics.hpp"
#include "tmle/parallel.hpp"

namespace tmle {

namespace {

constexpr std::size_t kBlock = 256;
constexpr double kEdge = 1e-12;

}  // namespace

void FitConfig::validate() const {
  if (!(alpha >= 1.0) || !std::isfinite(alpha) || alpha != std::floor(alpha)) {
    throw ConfigError("alpha must be an integer >= 1");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be non-negative");
  if (max_level < 0 || max_level > 12) throw ConfigError("max_level must lie in [0, 12]");
  if (!(link.k_min > 0.0 && link.k_min < link.k_max)) throw ConfigError("link needs 0 < k_min < k_max");
  if (link.calibrated && !(link.k_min < 1.0 && link.k_max > 1.0)) {
    throw ConfigError("calibrated link needs k_min < 1 < k_max");
  }
  if (optimizer.max_iters < 0) throw ConfigError("max_iters must be non-negative");
  if (optimizer.memory < 1) throw ConfigError("optimizer memory must be at least 1");
  if (quadrature_order < 1 || quadrature_order > 64) throw ConfigError("quadrature_order must lie in [1, 64]");
}

Schedule tuning_schedule(std::size_t n, double alpha, std::size_t dim) {
  if (n == 0) throw InputError("tuning schedule needs N >= 1");
  if (!(alpha > 0.0)) throw InputError("tuning schedule needs alpha > 0");
  if (dim == 0) throw InputError("tuning schedule needs d >= 1");
  const double e = std::log2(static_cast<double>(n)) / (2.0 * alpha + static_cast<double>(dim));
  Schedule s;
  s.lambda = std::exp2(-alpha * e);
  s.max_level = std::max(0, static_cast<int>(std::ceil(e - 1e-12)));
  return s;
}

SampleSet prepare_data(const SampleSet& data) {
  if (data.dim == 0) throw InputError("sample set has dimension 0");
  if (data.points.size() % data.dim != 0) throw InputError("sample buffer is not a multiple of the dimension");
  SampleSet out = data;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    double& v = out.points[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InputError("sample " + std::to_string(i / data.dim) + " coordinate " + std::to_string(i % data.dim) +
                       " = " + std::to_string(v) + " lies outside [0,1]");
    }
    if (v == 0.0) v = kEdge;
    if (v == 1.0) v = 1.0 - kEdge;
  }
  return out;
}

// ---------------------------------------------------------------------------
// LikelihoodObjective

struct LikelihoodObjective::Impl {
  detail::NodeTable table;
  explicit Impl(const WaveletBasis& basis, std::size_t order) : table(basis, order) {}
};

namespace {

struct Active {
  std::size_t id;
  double value;
};

// Per-component quantities shared by every sample on the same fibre.
struct Fibre {
  detail::Slice slice;
  std::vector<WaveletBasis::CollapsedGroup> groups;
  std::vector<double> a;  // int Phi'(F) g_b over [0,1]
};

struct Scratch {
  std::vector<Active> active;
  std::vector<Active> node_active;
  std::vector<double> u;
  std::vector<double> numg;
};

void fibre_integrals(const detail::NodeTable& table, Fibre& f) {
  const std::size_t m = table.basis().catalog_size();
  f.a.assign(m, 0.0);
  for (std::size_t b = 0; b < m; ++b) {
    const std::size_t lo = table.row_begin(b);
    const std::size_t hi = table.row_end(b);
    if (lo >= hi) continue;
    f.a[b] = kernels::dot(std::span<const double>(f.slice.wdphi).subspan(lo, hi - lo),
                          table.row(b).subspan(lo, hi - lo));
  }
}

void build_fibre(const detail::NodeTable& table, const LinkFunction& link, std::span<const double> theta,
                 std::size_t k, std::span<const double> prefix, bool with_gradient, Fibre& f) {
  detail::collapse_coefficients(table.basis(), theta, k, prefix, f.groups, f.slice);
  detail::fill_from_coefficients(table, link, f.slice);
  if (with_gradient) fibre_integrals(table, f);
}

// log of the k-th factor of eta(S(x)) det grad S(x); accumulates the
// catalog-space gradient into s.u when requested.
double component_term(const detail::NodeTable& table, const LinkFunction& link, const Marginal& marginal,
                      const Fibre& f, double xk, bool with_gradient, Scratch& s) {
  const WaveletBasis& basis = table.basis();
  const PanelLayout& layout = table.layout();
  const std::span<const double> coeffs = f.slice.coeffs;
  const double denom = f.slice.denominator;

  s.active.clear();
  basis.for_each_active(xk, [&](std::size_t b, double v) { s.active.push_back({b, v}); });
  double fx = 0.0;
  for (const auto& e : s.active) fx += coeffs[e.id] * e.value;
  double phix = 0.0;
  double dphix = 0.0;
  link.phi_and_prime(fx, phix, dphix);
  if (!(phix > 0.0) || !(denom > 0.0)) throw NumericalError("non-positive link value in the likelihood");
  double value = std::log(phix) - std::log(denom);

  const bool uniform = marginal.is_uniform();
  double ratio = 0.0;
  double sk = 0.0;
  const std::size_t m = basis.catalog_size();
  if (with_gradient) {
    s.u.resize(m);
    for (std::size_t b = 0; b < m; ++b) s.u[b] = -f.a[b] / denom;
    const double r = dphix / phix;
    for (const auto& e : s.active) s.u[e.id] += r * e.value;
  }
  if (uniform) return value;

  // S_k(x) and, for the gradient, int_0^{x_k} Phi'(F) g_b.
  const std::size_t p = detail::panel_of(layout, xk);
  const double a0 = static_cast<double>(p) * layout.width();
  const double len = xk - a0;
  double partial = 0.0;
  if (with_gradient) s.numg.assign(m, 0.0);
  if (len > 0.0) {
    for (std::size_t q = 0; q < layout.order; ++q) {
      const double y = a0 + len * layout.unit_nodes[q];
      s.node_active.clear();
      basis.for_each_active(y, [&](std::size_t b, double v) { s.node_active.push_back({b, v}); });
      double fy = 0.0;
      for (const auto& e : s.node_active) fy += coeffs[e.id] * e.value;
      double phiy = 0.0;
      double dphiy = 0.0;
      link.phi_and_prime(fy, phiy, dphiy);
      partial += layout.unit_weights[q] * phiy;
      if (with_gradient) {
        const double w = len * layout.unit_weights[q] * dphiy;
        for (const auto& e : s.node_active) s.numg[e.id] += w * e.value;
      }
    }
  }
  const double num = f.slice.panel_cum[p] + len * partial;
  const double raw = num / denom;
  sk = std::clamp(raw, 0.0, 1.0);
  const double ev = marginal.pdf(sk);
  if (!(ev > 0.0)) throw NumericalError("reference density vanishes at S(x)");
  value += std::log(ev);
  // S is flat where the clamp is active.
  if (with_gradient && raw == sk) {
    ratio = marginal.derivative(sk) / ev;
    const std::size_t full = p * layout.order;
    for (std::size_t b = 0; b < m; ++b) {
      const std::size_t lo = table.row_begin(b);
      const std::size_t hi = std::min(table.row_end(b), full);
      if (lo < hi) {
        s.numg[b] += kernels::dot(std::span<const double>(f.slice.wdphi).subspan(lo, hi - lo),
                                  table.row(b).subspan(lo, hi - lo));
      }
      s.u[b] += ratio * (s.numg[b] - sk * f.a[b]) / denom;
    }
  }
  return value;
}

void scatter(const std::vector<WaveletBasis::CollapsedGroup>& groups, std::span<const double> u,
             std::span<double> grad) {
  for (const auto& g : groups) {
    kernels::axpy(g.weight, u.subspan(g.catalog_offset, g.count), grad.subspan(g.theta_offset, g.count));
  }
}

}  // namespace

LikelihoodObjective::LikelihoodObjective(SampleSet data, FactorizedDensity reference, LinkFunction link,
                                         std::shared_ptr<const WaveletBasis> basis, double alpha, double lambda,
                                         std::size_t quadrature_order)
    : data_(prepare_data(data)),
      reference_(std::move(reference)),
      link_(link),
      basis_(std::move(basis)),
      alpha_(alpha),
      lambda_(lambda) {
  if (!basis_) throw InputError("likelihood objective needs a basis");
  if (basis_->dim() != data_.dim) throw InputError("basis and data dimensions differ");
  if (reference_.dim() != data_.dim) throw InputError("reference and data dimensions differ");
  penalty_weights_ = penalty_weights(*basis_, alpha_);
  impl_ = std::make_unique<Impl>(*basis_, quadrature_order);
}

LikelihoodObjective::~LikelihoodObjective() = default;
LikelihoodObjective::LikelihoodObjective(LikelihoodObjective&&) noexcept = default;

std::size_t LikelihoodObjective::num_parameters() const { return basis_->total_size(); }

double LikelihoodObjective::negative_log_likelihood(std::span<const double> theta,
                                                    std::span<double> gradient) const {
  const std::size_t np = num_parameters();
  if (theta.size() != np) throw InputError("theta has the wrong length");
  const bool with_gradient = !gradient.empty();
  if (with_gradient && gradient.size() != np) throw InputError("gradient buffer has the wrong length");
  for (double v : theta) {
    if (!std::isfinite(v)) throw NumericalError("theta has a non-finite entry");
  }

  const detail::NodeTable& table = impl_->table;
  const std::size_t d = data_.dim;
  const std::size_t n = data_.size();
  const std::size_t m = basis_->catalog_size();
  if (with_gradient) std::fill(gradient.begin(), gradient.end(), 0.0);
  if (n == 0) return 0.0;

  // The first component does not depend on any prefix.
  Fibre first;
  build_fibre(table, link_, theta, 0, {}, with_gradient, first);

  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> block_value(blocks, 0.0);
  std::vector<std::vector<double>> block_grad(with_gradient ? blocks : 0);
  std::vector<std::vector<double>> block_u0(with_gradient ? blocks : 0);

  parallel_blocks(blocks, [&](std::size_t blk) {
    Scratch s;
    Fibre fibre;
    std::vector<double> grad;
    std::vector<double> u0;
    if (with_gradient) {
      grad.assign(d > 1 ? np : 0, 0.0);
      u0.assign(m, 0.0);
    }
    double total = 0.0;
    const std::size_t end = std::min(n, (blk + 1) * kBlock);
    for (std::size_t i = blk * kBlock; i < end; ++i) {
      const auto x = data_.point(i);
      for (std::size_t k = 0; k < d; ++k) {
        const Fibre* f = &first;
        if (k > 0) {
          build_fibre(table, link_, theta, k, x.first(k), with_gradient, fibre);
          f = &fibre;
        }
        total += component_term(table, link_, reference_.marginal(k), *f, x[k], with_gradient, s);
        if (!with_gradient) continue;
        if (k == 0) {
          for (std::size_t b = 0; b < m; ++b) u0[b] += s.u[b];
        } else {
          scatter(f->groups, s.u, grad);
        }
      }
    }
    block_value[blk] = total;
    if (with_gradient) {
      block_grad[blk] = std::move(grad);
      block_u0[blk] = std::move(u0);
    }
  });

  double total = 0.0;
  for (double v : block_value) total += v;
  const double scale = -1.0 / static_cast<double>(n);
  if (!std::isfinite(total)) throw NumericalError("non-finite log-likelihood");
  if (with_gradient) {
    std::vector<double> u0(m, 0.0);
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      for (std::size_t b = 0; b < m; ++b) u0[b] += block_u0[blk][b];
      if (d > 1) {
        for (std::size_t j = 0; j < np; ++j) gradient[j] += block_grad[blk][j];
      }
    }
    scatter(first.groups, u0, gradient);
    for (double& g : gradient) g *= scale;
  }
  return scale * total;
}

double LikelihoodObjective::penalty(std::span<const double> theta, std::span<double> gradient) const {
  if (theta.size() != num_parameters()) throw InputError("theta has the wrong length");
  const double l2 = lambda_ * lambda_;
  double s = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) s += penalty_weights_[j] * theta[j] * theta[j];
  if (!gradient.empty()) {
    for (std::size_t j = 0; j < theta.size(); ++j) gradient[j] += 2.0 * l2 * penalty_weights_[j] * theta[j];
  }
  return l2 * s;
}

double LikelihoodObjective::evaluate(std::span<const double> theta, std::span<double> gradient) const {
  const double nll = negative_log_likelihood(theta, gradient);
  return nll + penalty(theta, gradient);
}

// ---------------------------------------------------------------------------
// Free functions

std::shared_ptr<const WaveletBasis> make_basis(const FitConfig& config, std::size_t dim) {
  return std::make_shared<const WaveletBasis>(config.family, dim, config.max_level);
}

double negative_log_likelihood(const Theta& theta, const SampleSet& data, const FactorizedDensity& reference,
                               const LinkFunction& link, std::size_t quadrature_order) {
  const LikelihoodObjective obj(data, reference, link, theta.basis_ptr(), theta.alpha(), 0.0, quadrature_order);
  return obj.negative_log_likelihood(theta.values());
}

namespace {

LikelihoodObjective objective_for(const Theta& theta, const SampleSet& data, const FactorizedDensity& reference,
                                  const FitConfig& config) {
  config.validate();
  return LikelihoodObjective(data, reference, config.link.make(), theta.basis_ptr(), config.alpha, config.lambda,
                             config.quadrature_order);
}

class CeresObjective final : public ceres::FirstOrderFunction {
 public:
  explicit CeresObjective(const LikelihoodObjective& obj) : obj_(obj) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const std::span<const double> theta(parameters, obj_.num_parameters());
    for (double v : theta) {
      if (!std::isfinite(v)) return false;
    }
    try {
      std::span<double> g;
      if (gradient != nullptr) g = std::span<double>(gradient, obj_.num_parameters());
      *cost = obj_.evaluate(theta, g);
    } catch (const NumericalError&) {
      return false;
    }
    return std::isfinite(*cost);
  }

  int NumParameters() const override { return static_cast<int>(obj_.num_parameters()); }

 private:
  const LikelihoodObjective& obj_;
};

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

double objective(const Theta& theta, const SampleSet& data, const FactorizedDensity& reference,
                 const FitConfig& config) {
  return objective_for(theta, data, reference, config).evaluate(theta.values());
}

std::vector<double> gradient(const Theta& theta, const SampleSet& data, const FactorizedDensity& reference,
                             const FitConfig& config) {
  std::vector<double> g(theta.values().size(), 0.0);
  objective_for(theta, data, reference, config).evaluate(theta.values(), g);
  return g;
}

FitResult fit(const SampleSet& data, const FactorizedDensity& reference, const FitConfig& config) {
  config.validate();
  auto basis = make_basis(config, data.dim);
  Theta theta(basis, config.alpha);
  if (config.initial) {
    if (config.initial->size() != theta.values().size()) {
      throw ConfigError("initial theta has " + std::to_string(config.initial->size()) + " entries, expected " +
                        std::to_string(theta.values().size()));
    }
    std::copy(config.initial->begin(), config.initial->end(), theta.values().begin());
  }
  const LikelihoodObjective obj(data, reference, config.link.make(), basis, config.alpha, config.lambda,
                                config.quadrature_order);
  const std::size_t np = obj.num_parameters();
  std::vector<double> params(theta.values().begin(), theta.values().end());
  std::vector<double> grad(np, 0.0);
  const double f0 = obj.evaluate(params, grad);
  const double tol = config.optimizer.gradient_tolerance > 0.0 ? config.optimizer.gradient_tolerance
                                                              : 1e-6 * std::max(1.0, std::fabs(f0));

  FitResult result{.theta_hat = theta,
                   .objective_value = f0,
                   .initial_objective = f0,
                   .termination = {},
                   .objective_trace = {}};
  result.gradient_norm_final = max_abs(grad);

  if (result.gradient_norm_final > tol && config.optimizer.max_iters > 0) {
    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::LBFGS;
    options.max_lbfgs_rank = config.optimizer.memory;
    options.max_num_iterations = config.optimizer.max_iters;
    options.gradient_tolerance = tol;
    options.function_tolerance = 0.0;
    options.parameter_tolerance = 0.0;
    options.logging_type = ceres::SILENT;
    options.minimizer_progress_to_stdout = false;
    ceres::GradientProblem problem(new CeresObjective(obj));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, params.data(), &summary);
    result.termination = ceres::TerminationTypeToString(summary.termination_type);
    if (!summary.message.empty()) result.termination += ": " + summary.message;
    result.iterations = std::max(0, static_cast<int>(summary.iterations.size()) - 1);
    if (config.optimizer.record_trace) {
      for (const auto& it : summary.iterations) result.objective_trace.push_back(it.cost);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    result.objective_value = obj.evaluate(params, grad);
    result.gradient_norm_final = max_abs(grad);
  } else {
    result.termination = result.gradient_norm_final <= tol ? "CONVERGENCE: initial gradient below tolerance"
                                                           : "NO_CONVERGENCE: max_iters is 0";
    if (config.optimizer.record_trace) result.objective_trace.push_back(f0);
  }
  result.converged = result.gradient_norm_final <= tol;
  std::copy(params.begin(), params.end(), result.theta_hat.values().begin());
  return result;
}

std::shared_ptr<const RationalTriangularMap> fitted_map(const Theta& theta, const FitConfig& config) {
  return std::make_shared<const RationalTriangularMap>(theta, config.link.make(), config.quadrature_order);
}

double tau_squared(const Theta& theta, const LinkFunction& link, const DensityField& truth,
                   const FactorizedDensity& reference, double lambda, double alpha, const GridSpec& grid,
                   std::size_t quadrature_order) {
  auto map = std::make_shared<const RationalTriangularMap>(theta, link, quadrature_order);
  const DensityField pulled = pullback_density(map, reference.as_field());
  const double h = hellinger(pulled, truth, grid);
  const double norm = b_alpha_norm(theta, alpha);
  return h * h + lambda * lambda * norm * norm;
}

}  // namespace tmle
