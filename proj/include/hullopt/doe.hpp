// Sobol quasi-random design-of-experiments generation and the mapping of
// unit-cube points onto design parameters.
//
// Direction numbers are the first 16 dimensions of the Joe-Kuo table
// (new-joe-kuo-6); they are embedded rather than loaded at runtime and
// guarded by a checksum test. Points are evaluated by index through the
// gray-code construction, so the sequence is independent of call batching.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hullopt/errors.hpp"
#include "hullopt/morph.hpp"
#include "hullopt/rng.hpp"

namespace hullopt {

constexpr int kSobolMaxDim = 16;
constexpr int kSobolBits = 32;

namespace detail {

struct SobolPolynomial {
  int s;                      // degree
  std::uint32_t a;            // coefficients of the primitive polynomial
  std::array<std::uint32_t, 6> m;  // initial direction integers
};

// Joe-Kuo new-joe-kuo-6 rows for dimensions 2..16 (dimension 1 uses m_j = 1).
inline const std::array<SobolPolynomial, 15> kSobolTable = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
}};

inline std::uint64_t sobol_table_checksum() {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mixin = [&](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ull;
  };
  for (const auto& row : kSobolTable) {
    mixin(static_cast<std::uint64_t>(row.s));
    mixin(row.a);
    for (int j = 0; j < row.s; ++j) mixin(row.m[j]);
  }
  return h;
}

}  // namespace detail

class SobolSequence {
 public:
  explicit SobolSequence(int dim, std::uint64_t skip = 1) : dim_(dim), index_(skip) {
    if (dim < 1 || dim > kSobolMaxDim)
      throw DataError("Sobol dimension " + std::to_string(dim) + " unsupported (1.." +
                      std::to_string(kSobolMaxDim) + ")");
    v_.assign(static_cast<std::size_t>(dim), {});
    for (int j = 0; j < kSobolBits; ++j) v_[0][j] = 1u << (31 - j);
    for (int d = 1; d < dim; ++d) {
      const auto& row = detail::kSobolTable[d - 1];
      const int s = row.s;
      for (int j = 0; j < s && j < kSobolBits; ++j) v_[d][j] = row.m[j] << (31 - j);
      for (int j = s; j < kSobolBits; ++j) {
        std::uint32_t val = v_[d][j - s] ^ (v_[d][j - s] >> s);
        for (int k = 1; k < s; ++k) {
          if ((row.a >> (s - 1 - k)) & 1u) val ^= v_[d][j - k];
        }
        v_[d][j] = val;
      }
    }
  }

  int dimension() const { return dim_; }
  std::uint64_t index() const { return index_; }

  // Point k of the sequence (k = 0 is the all-zeros point).
  std::vector<double> point(std::uint64_t k) const {
    std::vector<double> x(static_cast<std::size_t>(dim_));
    const std::uint64_t gray = k ^ (k >> 1);
    for (int d = 0; d < dim_; ++d) {
      std::uint32_t acc = 0;
      for (int j = 0; j < kSobolBits; ++j) {
        if ((gray >> j) & 1ull) acc ^= v_[d][j];
      }
      x[d] = static_cast<double>(acc) * 0x1.0p-32;
    }
    return x;
  }

  std::vector<double> next() { return point(index_++); }

 private:
  int dim_;
  std::uint64_t index_;
  std::vector<std::array<std::uint32_t, kSobolBits>> v_;
};

// skip = 1 drops the all-zeros point, which maps to the all-lower-bound
// corner of the design space.
inline std::vector<std::vector<double>> sobol_generate(int dim, std::size_t n, std::uint64_t skip = 1) {
  SobolSequence seq(dim, skip);
  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(seq.next());
  return pts;
}

// ---------------------------------------------------------------------------
// Design space: which parameters are free, which are frozen, and the affine
// map between the unit cube over free parameters and DesignParams.

class ParamSpace {
 public:
  ParamSpace() { rebuild(); }

  ParamSpace(DesignBounds bounds, std::array<std::optional<double>, kParamCount> frozen)
      : bounds_(std::move(bounds)), frozen_(std::move(frozen)) {
    bounds_.validate();
    rebuild();
  }

  const DesignBounds& bounds() const { return bounds_; }
  const std::array<std::optional<double>, kParamCount>& frozen() const { return frozen_; }
  int free_count() const { return static_cast<int>(free_.size()); }
  const std::vector<int>& free_indices() const { return free_; }

  DesignParams params_from_unit(const std::vector<double>& unit) const {
    if (static_cast<int>(unit.size()) != free_count())
      throw DataError("unit point has " + std::to_string(unit.size()) + " coordinates, expected " +
                      std::to_string(free_count()));
    std::array<double, kParamCount> v{};
    for (int i = 0; i < kParamCount; ++i) v[i] = frozen_[i] ? *frozen_[i] : bounds_.lower[i];
    for (std::size_t k = 0; k < free_.size(); ++k) {
      const int i = free_[k];
      v[i] = bounds_.lower[i] + unit[k] * (bounds_.upper[i] - bounds_.lower[i]);
    }
    return DesignParams::from_array(v);
  }

  std::vector<double> unit_from_params(const DesignParams& p) const {
    const auto v = p.as_array();
    std::vector<double> unit(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) {
      const int i = free_[k];
      unit[k] = (v[i] - bounds_.lower[i]) / (bounds_.upper[i] - bounds_.lower[i]);
    }
    return unit;
  }

  bool in_bounds(const DesignParams& p) const {
    const auto v = p.as_array();
    for (int i = 0; i < kParamCount; ++i) {
      if (frozen_[i]) continue;
      if (v[i] < bounds_.lower[i] || v[i] > bounds_.upper[i]) return false;
    }
    return true;
  }

  std::vector<std::string> bounds_violations(const DesignParams& p) const {
    std::vector<std::string> out;
    const auto v = p.as_array();
    for (int i = 0; i < kParamCount; ++i) {
      if (frozen_[i]) continue;
      if (v[i] < bounds_.lower[i] || v[i] > bounds_.upper[i]) out.push_back("bounds:" + kParamNames[i]);
    }
    return out;
  }

 private:
  void rebuild() {
    free_.clear();
    for (int i = 0; i < kParamCount; ++i)
      if (!frozen_[i]) free_.push_back(i);
  }

  DesignBounds bounds_;
  std::array<std::optional<double>, kParamCount> frozen_{};
  std::vector<int> free_;
};

inline DesignParams scale_to_bounds(const std::vector<double>& unit, const ParamSpace& space) {
  return space.params_from_unit(unit);
}

// The Sobol sampling plan over the free parameters of a design space.
inline std::vector<DesignParams> sobol_plan(const ParamSpace& space, std::size_t n, std::uint64_t skip = 1) {
  const auto pts = sobol_generate(space.free_count(), n, skip);
  std::vector<DesignParams> out;
  out.reserve(n);
  for (const auto& u : pts) out.push_back(space.params_from_unit(u));
  return out;
}

}  // namespace hullopt
