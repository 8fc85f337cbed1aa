#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tmle {

enum class WaveletFamily { haar, daubechies4 };

std::string to_string(WaveletFamily family);
WaveletFamily wavelet_family_from_string(const std::string& name);

// Father/mother functions at scale 0. Both are supported on
// [0, support_length(family)].
double support_length(WaveletFamily family);
double father_wavelet(WaveletFamily family, double x);
double mother_wavelet(WaveletFamily family, double x);

// Daubechies-4 father and mother tabulated at dyadic resolution 2^-12 on
// [0, 3] by exact dyadic refinement from the integer values; evaluation
// interpolates linearly between table points. Built once, shared read-only.
class CascadeTables {
 public:
  static constexpr int kResolutionBits = 12;
  static const CascadeTables& daubechies4();

  double father(double x) const { return lookup(father_, x); }
  double mother(double x) const { return lookup(mother_, x); }
  const std::vector<double>& father_table() const { return father_; }
  const std::vector<double>& mother_table() const { return mother_; }

 private:
  CascadeTables();
  static double lookup(const std::vector<double>& table, double x);

  std::vector<double> father_;
  std::vector<double> mother_;
};

// Daubechies-4 low-pass filter h_0..h_3 (sum sqrt(2)).
const std::vector<double>& daubechies4_filter();

// Truncated tensor wavelet basis on Q_1, ..., Q_d.
//
// Component k (0-based) lives on Q_{k+1}. Level 0 holds all 2^{k+1}
// father/mother tensor types, levels l >= 1 all types except the pure-father
// one, so levels 0..J span the dyadic multiresolution space of mesh
// 2^-(J+1). Only translates whose support meets the cube are indexed. Within
// a level, coefficients are ordered by type, then by translates row-major
// (last axis fastest). Type bit for axis j is (type >> (k - j)) & 1, a set
// bit meaning the mother function on that axis.
//
// One-dimensional functions 2^{l/2} g(2^l y - n) form the "catalog"; a tensor
// basis function is a product of catalog entries.
class WaveletBasis {
 public:
  WaveletBasis(WaveletFamily family, std::size_t dim, int max_level);

  WaveletFamily family() const { return family_; }
  std::size_t dim() const { return dim_; }
  int max_level() const { return max_level_; }

  // Translates n at level l range over [min_translate(l), min_translate(l) + translates(l)).
  int min_translate(int level) const;
  std::size_t translates(int level) const;

  // --- catalog of one-dimensional functions ---
  std::size_t catalog_size() const { return catalog_size_; }
  std::size_t catalog_offset(int level, bool mother) const;
  double catalog_eval(std::size_t id, double y) const;
  int catalog_level(std::size_t id) const;
  // Visits (id, value) for every catalog entry that may be non-zero at y.
  template <class Fn>
  void for_each_active(double y, Fn&& fn) const;
  // Catalog ids of one (level, father/mother) block whose support meets
  // [a, b]: returns the half-open translate-offset range.
  void active_range(int level, double a, double b, std::size_t& lo, std::size_t& hi) const;

  // --- tensor index sets I_{k,J} ---
  std::size_t size(std::size_t k) const;                 // |I_{k,J}|
  std::size_t level_size(std::size_t k, int level) const;  // L^k_l
  std::size_t level_offset(std::size_t k, int level) const;
  std::size_t total_size() const { return component_offsets_.back(); }
  std::size_t component_offset(std::size_t k) const { return component_offsets_.at(k); }

  struct TensorIndex {
    int level = 0;
    unsigned type = 0;
    std::vector<int> translates;
  };
  // m is 1-based within level l. Throws InputError when out of range.
  std::size_t flat_index(std::size_t k, int level, std::size_t m) const;
  TensorIndex tensor_index(std::size_t k, std::size_t flat) const;
  int level_of(std::size_t k, std::size_t flat) const;
  std::size_t m_of(std::size_t k, std::size_t flat) const;

  // psi^k_{lm}(x_{1:k+1}) for a flat index within component k.
  double eval(std::size_t k, std::size_t flat, std::span<const double> x) const;

  // F_k(x) = sum_i coeffs[i] psi^k_i(x), visiting only overlapping terms.
  double expand(std::size_t k, std::span<const double> coeffs, std::span<const double> x) const;

  // For fixed x_{1:k} (the prefix), F_k(prefix, y) = sum over groups of
  // weight * sum_t coeffs[theta_offset + t] * catalog[catalog_offset + t](y).
  struct CollapsedGroup {
    std::size_t theta_offset;
    std::size_t catalog_offset;
    std::size_t count;
    double weight;
    int level;
  };
  void collapse(std::size_t k, std::span<const double> prefix, std::vector<CollapsedGroup>& out) const;

  // Right-end convention: evaluation at y = 1 uses the left limit.
  static double clamp_coordinate(double y);

 private:
  std::size_t types_at(std::size_t k, int level) const;
  unsigned first_type(int level) const { return level == 0 ? 0u : 1u; }

  WaveletFamily family_;
  std::size_t dim_;
  int max_level_;
  double support_;
  std::vector<int> min_translate_;
  std::vector<std::size_t> translates_;
  std::vector<std::size_t> catalog_offsets_;  // 2 per level: father, mother
  std::size_t catalog_size_ = 0;
  std::vector<std::vector<std::size_t>> level_offsets_;  // [k][l], with sentinel
  std::vector<std::size_t> component_offsets_;
};

template <class Fn>
void WaveletBasis::for_each_active(double y, Fn&& fn) const {
  y = clamp_coordinate(y);
  for (int l = 0; l <= max_level_; ++l) {
    std::size_t lo = 0;
    std::size_t hi = 0;
    active_range(l, y, y, lo, hi);
    for (int mother = 0; mother < 2; ++mother) {
      const std::size_t base = catalog_offset(l, mother != 0);
      for (std::size_t t = lo; t < hi; ++t) fn(base + t, catalog_eval(base + t, y));
    }
  }
}

}  // namespace tmle
