#include "tmle/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tmle/error.hpp"

namespace tmle {

std::string to_string(WaveletFamily family) {
  return family == WaveletFamily::haar ? "haar" : "daubechies4";
}

WaveletFamily wavelet_family_from_string(const std::string& name) {
  if (name == "haar") return WaveletFamily::haar;
  if (name == "daubechies4" || name == "db4" || name == "d4") return WaveletFamily::daubechies4;
  throw InputError("unknown basis backend '" + name + "' (expected haar or daubechies4)");
}

double support_length(WaveletFamily family) { return family == WaveletFamily::haar ? 1.0 : 3.0; }

double father_wavelet(WaveletFamily family, double x) {
  if (family == WaveletFamily::haar) return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;
  return CascadeTables::daubechies4().father(x);
}

double mother_wavelet(WaveletFamily family, double x) {
  if (family == WaveletFamily::haar) {
    if (x >= 0.0 && x < 0.5) return 1.0;
    if (x >= 0.5 && x < 1.0) return -1.0;
    return 0.0;
  }
  return CascadeTables::daubechies4().mother(x);
}

const std::vector<double>& daubechies4_filter() {
  static const std::vector<double> h = [] {
    const double s3 = std::sqrt(3.0);
    const double norm = 4.0 * std::numbers::sqrt2;
    return std::vector<double>{(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm};
  }();
  return h;
}

const CascadeTables& CascadeTables::daubechies4() {
  static const CascadeTables tables;
  return tables;
}

CascadeTables::CascadeTables() {
  const std::vector<double>& h = daubechies4_filter();
  const double r2 = std::numbers::sqrt2;
  constexpr std::size_t scale = std::size_t{1} << kResolutionBits;
  const std::size_t n = 3 * scale + 1;
  father_.assign(n, 0.0);
  // Integer values: eigenvector of phi(m) = sqrt2 * sum_j h_j phi(2m - j) on
  // m in {1, 2}, normalized by phi(1) + phi(2) = 1.
  const double m11 = r2 * h[1];
  const double m12 = r2 * h[0];
  const double v1 = m12;
  const double v2 = 1.0 - m11;
  father_[scale] = v1 / (v1 + v2);
  father_[2 * scale] = v2 / (v1 + v2);
  // Two-scale refinement: each new odd multiple of 2^-j depends only on
  // values already present on the coarser grid.
  for (int j = 1; j <= kResolutionBits; ++j) {
    const std::size_t step = scale >> j;
    for (std::size_t i = step; i < n; i += 2 * step) {
      double v = 0.0;
      for (std::size_t t = 0; t < 4; ++t) {
        const std::ptrdiff_t idx = 2 * static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(t * scale);
        if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(n)) v += h[t] * father_[static_cast<std::size_t>(idx)];
      }
      father_[i] = r2 * v;
    }
  }
  mother_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t t = 0; t < 4; ++t) {
      const double g = (t % 2 == 0 ? 1.0 : -1.0) * h[3 - t];
      const std::ptrdiff_t idx = 2 * static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(t * scale);
      if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(n)) v += g * father_[static_cast<std::size_t>(idx)];
    }
    mother_[i] = r2 * v;
  }
}

double CascadeTables::lookup(const std::vector<double>& table, double x) {
  constexpr double scale = static_cast<double>(std::size_t{1} << kResolutionBits);
  if (!(x > 0.0 && x < 3.0)) return 0.0;
  const double u = x * scale;
  const auto i = static_cast<std::size_t>(u);
  if (i + 1 >= table.size()) return table.back();
  const double t = u - static_cast<double>(i);
  return table[i] + t * (table[i + 1] - table[i]);
}

// ---------------------------------------------------------------------------

WaveletBasis::WaveletBasis(WaveletFamily family, std::size_t dim, int max_level)
    : family_(family), dim_(dim), max_level_(max_level), support_(support_length(family)) {
  if (dim_ < 1) throw InputError("wavelet basis dimension must be >= 1");
  if (max_level_ < 0) throw InputError("wavelet max level must be >= 0");
  if (max_level_ > 20) throw InputError("wavelet max level above 20 is not supported");
  const int overhang = static_cast<int>(std::ceil(support_)) - 1;
  for (int l = 0; l <= max_level_; ++l) {
    min_translate_.push_back(-overhang);
    translates_.push_back((std::size_t{1} << l) + static_cast<std::size_t>(overhang));
    catalog_offsets_.push_back(catalog_size_);
    catalog_size_ += translates_.back();
    catalog_offsets_.push_back(catalog_size_);
    catalog_size_ += translates_.back();
  }
  component_offsets_.push_back(0);
  for (std::size_t k = 0; k < dim_; ++k) {
    std::vector<std::size_t> offs{0};
    for (int l = 0; l <= max_level_; ++l) {
      std::size_t per_type = 1;
      for (std::size_t a = 0; a <= k; ++a) per_type *= translates_[static_cast<std::size_t>(l)];
      offs.push_back(offs.back() + types_at(k, l) * per_type);
    }
    component_offsets_.push_back(component_offsets_.back() + offs.back());
    level_offsets_.push_back(std::move(offs));
  }
}

double WaveletBasis::clamp_coordinate(double y) {
  if (y >= 1.0) return std::nextafter(1.0, 0.0);
  if (y < 0.0) return 0.0;
  return y;
}

int WaveletBasis::min_translate(int level) const { return min_translate_.at(static_cast<std::size_t>(level)); }
std::size_t WaveletBasis::translates(int level) const { return translates_.at(static_cast<std::size_t>(level)); }

std::size_t WaveletBasis::catalog_offset(int level, bool mother) const {
  return catalog_offsets_.at(2 * static_cast<std::size_t>(level) + (mother ? 1 : 0));
}

int WaveletBasis::catalog_level(std::size_t id) const {
  const auto it = std::upper_bound(catalog_offsets_.begin(), catalog_offsets_.end(), id);
  return static_cast<int>((it - catalog_offsets_.begin() - 1) / 2);
}

double WaveletBasis::catalog_eval(std::size_t id, double y) const {
  const auto it = std::upper_bound(catalog_offsets_.begin(), catalog_offsets_.end(), id);
  const auto block = static_cast<std::size_t>(it - catalog_offsets_.begin() - 1);
  const int level = static_cast<int>(block / 2);
  const bool mother = block % 2 == 1;
  const int n = min_translate_[static_cast<std::size_t>(level)] + static_cast<int>(id - catalog_offsets_[block]);
  const double scale = std::ldexp(1.0, level);
  const double u = scale * clamp_coordinate(y) - n;
  const double amp = std::sqrt(scale);
  return amp * (mother ? mother_wavelet(family_, u) : father_wavelet(family_, u));
}

void WaveletBasis::active_range(int level, double a, double b, std::size_t& lo, std::size_t& hi) const {
  const double scale = std::ldexp(1.0, level);
  const int nmin = min_translate(level);
  const int count = static_cast<int>(translates(level));
  const int first = static_cast<int>(std::floor(scale * a - support_)) + 1;
  const int last = static_cast<int>(std::floor(scale * b));
  const int from = std::max(first, nmin);
  const int to = std::min(last, nmin + count - 1);
  if (to < from) {
    lo = hi = 0;
    return;
  }
  lo = static_cast<std::size_t>(from - nmin);
  hi = static_cast<std::size_t>(to - nmin + 1);
}

std::size_t WaveletBasis::types_at(std::size_t k, int level) const {
  const std::size_t all = std::size_t{1} << (k + 1);
  return level == 0 ? all : all - 1;
}

std::size_t WaveletBasis::size(std::size_t k) const { return level_offsets_.at(k).back(); }

std::size_t WaveletBasis::level_size(std::size_t k, int level) const {
  const auto& offs = level_offsets_.at(k);
  return offs.at(static_cast<std::size_t>(level) + 1) - offs.at(static_cast<std::size_t>(level));
}

std::size_t WaveletBasis::level_offset(std::size_t k, int level) const {
  return level_offsets_.at(k).at(static_cast<std::size_t>(level));
}

std::size_t WaveletBasis::flat_index(std::size_t k, int level, std::size_t m) const {
  if (k >= dim_) throw InputError("basis component out of range");
  if (level < 0 || level > max_level_) throw InputError("basis level out of range");
  if (m < 1 || m > level_size(k, level)) {
    throw InputError("basis index m=" + std::to_string(m) + " out of range at level " + std::to_string(level));
  }
  return level_offset(k, level) + m - 1;
}

int WaveletBasis::level_of(std::size_t k, std::size_t flat) const {
  const auto& offs = level_offsets_.at(k);
  if (flat >= offs.back()) throw InputError("flat basis index out of range");
  const auto it = std::upper_bound(offs.begin(), offs.end(), flat);
  return static_cast<int>(it - offs.begin() - 1);
}

std::size_t WaveletBasis::m_of(std::size_t k, std::size_t flat) const {
  return flat - level_offset(k, level_of(k, flat)) + 1;
}

WaveletBasis::TensorIndex WaveletBasis::tensor_index(std::size_t k, std::size_t flat) const {
  TensorIndex idx;
  idx.level = level_of(k, flat);
  const std::size_t c = translates(idx.level);
  std::size_t per_type = 1;
  for (std::size_t a = 0; a <= k; ++a) per_type *= c;
  std::size_t rem = flat - level_offset(k, idx.level);
  idx.type = first_type(idx.level) + static_cast<unsigned>(rem / per_type);
  rem %= per_type;
  idx.translates.assign(k + 1, 0);
  for (std::size_t a = k + 1; a-- > 0;) {
    idx.translates[a] = min_translate(idx.level) + static_cast<int>(rem % c);
    rem /= c;
  }
  return idx;
}

double WaveletBasis::eval(std::size_t k, std::size_t flat, std::span<const double> x) const {
  const TensorIndex idx = tensor_index(k, flat);
  double v = 1.0;
  for (std::size_t j = 0; j <= k; ++j) {
    const bool mother = ((idx.type >> (k - j)) & 1u) != 0;
    const std::size_t id = catalog_offset(idx.level, mother) +
                           static_cast<std::size_t>(idx.translates[j] - min_translate(idx.level));
    v *= catalog_eval(id, x[j]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

void WaveletBasis::collapse(std::size_t k, std::span<const double> prefix,
                            std::vector<CollapsedGroup>& out) const {
  out.clear();
  // Active translates and values per prefix axis: [axis][mother][t].
  std::vector<std::size_t> lo(k);
  std::vector<std::size_t> hi(k);
  std::vector<std::vector<double>> vals(2 * k);
  std::vector<std::size_t> pos(k);
  for (int l = 0; l <= max_level_; ++l) {
    const std::size_t c = translates(l);
    std::size_t per_type = c;
    for (std::size_t a = 0; a < k; ++a) per_type *= c;
    bool empty = false;
    for (std::size_t j = 0; j < k; ++j) {
      const double y = clamp_coordinate(prefix[j]);
      active_range(l, y, y, lo[j], hi[j]);
      if (lo[j] == hi[j]) empty = true;
      for (int mother = 0; mother < 2; ++mother) {
        auto& v = vals[2 * j + static_cast<std::size_t>(mother)];
        v.assign(hi[j] - lo[j], 0.0);
        const std::size_t base = catalog_offset(l, mother != 0);
        for (std::size_t t = lo[j]; t < hi[j]; ++t) v[t - lo[j]] = catalog_eval(base + t, y);
      }
    }
    if (empty) continue;
    const std::size_t ntypes = types_at(k, l);
    for (std::size_t tp = 0; tp < ntypes; ++tp) {
      const unsigned type = first_type(l) + static_cast<unsigned>(tp);
      const std::size_t type_base = level_offset(k, l) + tp * per_type;
      const std::size_t cat = catalog_offset(l, (type & 1u) != 0);
      for (std::size_t j = 0; j < k; ++j) pos[j] = lo[j];
      for (;;) {
        double w = 1.0;
        std::size_t off = 0;
        for (std::size_t j = 0; j < k; ++j) {
          const bool mother = ((type >> (k - j)) & 1u) != 0;
          w *= vals[2 * j + (mother ? 1 : 0)][pos[j] - lo[j]];
          off = off * c + pos[j];
        }
        if (w != 0.0) out.push_back({component_offset(k) + type_base + off * c, cat, c, w, l});
        bool carry = true;
        for (std::size_t j = k; carry && j-- > 0;) {
          if (++pos[j] < hi[j]) {
            carry = false;
          } else {
            pos[j] = lo[j];
          }
        }
        if (carry) break;
      }
    }
  }
}

double WaveletBasis::expand(std::size_t k, std::span<const double> coeffs, std::span<const double> x) const {
  std::vector<CollapsedGroup> groups;
  collapse(k, x.first(k), groups);
  const double y = clamp_coordinate(x[k]);
  const std::size_t base = component_offset(k);
  double sum = 0.0;
  for (const CollapsedGroup& g : groups) {
    std::size_t lo = 0;
    std::size_t hi = 0;
    active_range(g.level, y, y, lo, hi);
    double inner = 0.0;
    for (std::size_t t = lo; t < hi; ++t) {
      inner += coeffs[g.theta_offset - base + t] * catalog_eval(g.catalog_offset + t, y);
    }
    sum += g.weight * inner;
  }
  return sum;
}

}  // namespace tmle
