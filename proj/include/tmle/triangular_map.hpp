#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace tmle {

// A lower-triangular map S: Q_d -> Q_d. Component k (0-based) reads only
// x[0..k]; diagonal_partial(k, x) is d S_k / d x_k.
class TriangularMap {
 public:
  virtual ~TriangularMap() = default;

  virtual std::size_t dim() const = 0;
  virtual double component(std::size_t k, std::span<const double> x) const = 0;
  virtual double diagonal_partial(std::size_t k, std::span<const double> x) const = 0;

  void evaluate(std::span<const double> x, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> x) const;
  // prod_k diagonal_partial(k, x)
  double jacobian_determinant(std::span<const double> x) const;
};

using TriangularMapPtr = std::shared_ptr<const TriangularMap>;

// Triangular map from user-supplied component and partial callables.
class FunctionalTriangularMap final : public TriangularMap {
 public:
  using ComponentFn = std::function<double(std::span<const double>)>;

  FunctionalTriangularMap(std::vector<ComponentFn> components, std::vector<ComponentFn> partials);

  static std::shared_ptr<FunctionalTriangularMap> identity(std::size_t dim);

  std::size_t dim() const override { return components_.size(); }
  double component(std::size_t k, std::span<const double> x) const override;
  double diagonal_partial(std::size_t k, std::span<const double> x) const override;

 private:
  std::vector<ComponentFn> components_;
  std::vector<ComponentFn> partials_;
};

// Solves S(x) = z coordinate by coordinate: bisection on [0,1] to width
// 1e-12, then a Newton polish with the diagonal partial. Throws
// InversionError if a root is not bracketed or the residual exceeds 1e-9.
std::vector<double> invert_triangular(const TriangularMap& map, std::span<const double> z);

}  // namespace tmle

namespace tmle {

class DensityField;

// S^# eta (x) = eta(S(x)) * prod_k d_k S_k(x_{1:k}). Evaluation throws
// MonotonicityError where a diagonal partial is not positive. Declared bounds
// are [0, inf); callers that know better validate on a grid.
DensityField pullback_density(TriangularMapPtr map, const DensityField& eta);

}  // namespace tmle
