// Parametric hull deformation: three scalings derived from (scale_x, L/B,
// B/T) plus a longitudinal shift curve peaking at the midship parameter.
// Transform order is fixed: scale, then shift.
#pragma once

#include <array>
#include <cmath>
#include <string>

#include "hullopt/errors.hpp"
#include "hullopt/mesh.hpp"

namespace hullopt {

constexpr int kParamCount = 5;
inline const std::array<std::string, kParamCount> kParamNames = {"scale_x", "LbyB", "BbyT", "midship",
                                                                 "v_inf"};

struct DesignParams {
  double scale_x{1.0};
  double LbyB{6.96};   // length over beam
  double BbyT{3.52};   // beam over draught
  double midship{0.5}; // shift-curve peak, normalized hull length
  double v_inf{1.0};   // freestream speed, m/s

  std::array<double, kParamCount> as_array() const { return {scale_x, LbyB, BbyT, midship, v_inf}; }

  static DesignParams from_array(const std::array<double, kParamCount>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
};

struct DesignBounds {
  std::array<double, kParamCount> lower{0.9, 6.2, 3.0, 0.2, 0.7};
  std::array<double, kParamCount> upper{1.1, 7.8, 4.0, 0.8, 2.6};

  void validate() const {
    for (int i = 0; i < kParamCount; ++i) {
      if (!(lower[i] < upper[i]))
        throw DataError("bounds for " + kParamNames[i] + ": lower must be < upper");
    }
  }

  bool contains(const std::array<double, kParamCount>& v) const {
    for (int i = 0; i < kParamCount; ++i)
      if (v[i] < lower[i] || v[i] > upper[i]) return false;
    return true;
  }
};

// Validating constructor path: the DoE and optimizer build params through
// this; out-of-bounds values are an error here, an infeasible record there.
inline DesignParams make_params(const DesignBounds& bounds, const std::array<double, kParamCount>& values) {
  bounds.validate();
  for (int i = 0; i < kParamCount; ++i) {
    if (values[i] < bounds.lower[i] || values[i] > bounds.upper[i]) {
      throw DataError(kParamNames[i] + " = " + std::to_string(values[i]) + " outside [" +
                      std::to_string(bounds.lower[i]) + ", " + std::to_string(bounds.upper[i]) + "]");
    }
  }
  return DesignParams::from_array(values);
}

struct BaselineRatios {
  double LbyB0{6.96};  // L0/B0
  double BbyT0{3.52};  // B0/T0
};

struct ScaleFactors {
  double x{1.0}, y{1.0}, z{1.0};
};

inline ScaleFactors derived_scales(const DesignParams& p, const BaselineRatios& baseline) {
  ScaleFactors s;
  s.x = p.scale_x;
  s.y = p.scale_x * baseline.LbyB0 / p.LbyB;
  s.z = s.y * baseline.BbyT0 / p.BbyT;
  if (!(s.x > 0.0) || !(s.y > 0.0) || !(s.z > 0.0))
    throw DataError("derived scale factors must be positive");
  return s;
}

namespace detail {
// 3s^2 - 2s^3: value 0->1 with zero slope at both ends.
inline double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }
}  // namespace detail

// C1 bump made of two cubic Hermite segments joined at `midship`: zero value
// and slope at t = 0 and t = 1, |displacement| = |amplitude| exactly at the
// peak.
inline double shift_curve(double t, double midship, double amplitude) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  if (t <= midship) {
    if (midship <= 0.0) return 0.0;
    return amplitude * detail::smoothstep(t / midship);
  }
  if (midship >= 1.0) return 0.0;
  return amplitude * detail::smoothstep((1.0 - t) / (1.0 - midship));
}

// Largest |d(shift)/dt|; the smoothstep slope peaks at 1.5 mid-segment.
inline double shift_curve_max_slope(double midship, double amplitude) {
  const double m = std::min(std::max(midship, 0.0), 1.0);
  double worst = 0.0;
  if (m > 0.0) worst = std::max(worst, 1.5 * std::abs(amplitude) / m);
  if (m < 1.0) worst = std::max(worst, 1.5 * std::abs(amplitude) / (1.0 - m));
  return worst;
}

// Vertex map: (x, y, z) -> (sx*x + shift(t(x)), sy*y, sz*z), t normalized by
// the baseline x-extent. Topology is untouched. Rejects morphs whose shift
// slope would break x-monotonicity (self-intersection proxy).
inline HullMesh apply_morph(const HullMesh& mesh, const DesignParams& params,
                            const BaselineRatios& baseline, double shift_amplitude) {
  const ScaleFactors s = derived_scales(params, baseline);
  const double x0 = mesh.min_corner().x;
  const double extent = mesh.max_corner().x - mesh.min_corner().x;
  if (!(extent > 0.0)) throw DataError("apply_morph: mesh has no x extent");

  if (shift_amplitude != 0.0) {
    const double max_dslope = shift_curve_max_slope(params.midship, shift_amplitude) / extent;
    if (s.x - max_dslope <= 1e-9) {
      throw MorphRejected("shift slope " + std::to_string(max_dslope) + " exceeds scale_x " +
                          std::to_string(s.x) + "; x mapping not monotone");
    }
  }

  std::vector<Vec3> out(mesh.vertex_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& v = mesh.vertices()[i];
    double x = s.x * v.x;
    if (shift_amplitude != 0.0) {
      const double t = (v.x - x0) / extent;
      x += shift_curve(t, params.midship, shift_amplitude);
    }
    out[i] = {x, s.y * v.y, s.z * v.z};
  }
  return mesh.with_vertices(std::move(out));
}

}  // namespace hullopt
