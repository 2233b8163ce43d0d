// Synthetic flow ground truth: a procedurally generated hull plus analytic,
// self-consistent surface and volume fields. The model is invented; its job
// is to make the whole pipeline trainable and testable, not to be physically
// accurate. Coefficients are chosen so resistance varies significantly over
// the design bounds, stays positive, and exhibits a speed-dependent optimal
// midship position (wave phase vs hull slope interference).
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hullopt/doe.hpp"
#include "hullopt/fields.hpp"
#include "hullopt/mesh.hpp"
#include "hullopt/morph.hpp"
#include "hullopt/rng.hpp"

namespace hullopt {

enum class FrictionLine : std::uint8_t { Ittc1957 = 0 };

// C_f = 0.075 / (log10 Re - 2)^2
inline double friction_coefficient(FrictionLine line, double reynolds) {
  (void)line;  // single supported correlation line
  const double d = std::log10(reynolds) - 2.0;
  return 0.075 / (d * d);
}

struct OracleConfig {
  // baseline hull dimensions
  double L0{3.0};
  double B0{3.0 / 6.96};
  double T0{(3.0 / 6.96) / 3.52};
  int hull_stations{28};    // sections along x, both degenerate end poles included
  int hull_ring_verts{18};  // vertices per section ring (even, for exact y symmetry)
  double bow_shift{1.0};    // fore-aft asymmetry exponent of the section profile
  double fullness{0.55};    // section-width exponent (smaller = fuller midbody)

  FrictionLine friction{FrictionLine::Ittc1957};

  // wave model: elevation = wave_amp * Fn^2 * L * cos(k x - phase) * lateral
  // decay. The phase follows the design's midship station (a stand-in for
  // how shifting displacement moves the ship's wave system), so the
  // interference force has a speed-dependent optimal midship.
  double wave_amp{0.03};
  double wave_lateral_decay{0.2};  // fraction of L
  double wave_phase_gain{7.0};     // rad per unit midship offset from 0.5
  double wave_pressure_gain{1.0};  // scales the wave term in p only
  double q_eps_frac{0.18};         // interface smoothing as a fraction of draught

  // pressure model
  double k_stag{0.9};        // windward stagnation rise
  double k_base{0.45};       // leeward base suction
  double k_suction{0.30};    // midbody suction
  double press_decay{0.45};  // volume decay length, fraction of beam

  // velocity model
  double k_wake{0.5};
  double wake_decay{0.5};  // fraction of beam
  double k_upwash{0.12};

  std::array<int, 3> volume_grid{10, 8, 8};
  double shift_amplitude_frac{0.02};  // morph shift amplitude, fraction of L0

  double noise{0.0};  // fractional field noise, 0 = exact
  std::uint64_t seed{0};

  void validate() const {
    if (!(L0 > 0.0) || !(B0 > 0.0) || !(T0 > 0.0)) throw DataError("hull dimensions must be positive");
    if (volume_grid[0] < 8 || volume_grid[1] < 8 || volume_grid[2] < 8)
      throw DataError("volume grid must be at least 8x8x8");
    if (hull_stations < 6 || hull_ring_verts < 8 || hull_ring_verts % 2 != 0)
      throw DataError("hull resolution too coarse or ring count odd");
  }

  BaselineRatios baseline_ratios() const { return {L0 / B0, B0 / T0}; }
  double shift_amplitude() const { return shift_amplitude_frac * L0; }
};

// ---------------------------------------------------------------------------
// Procedural hull: elliptic sections swept along x with a smoothly blended
// bow/stern taper, closed by degenerate pole points. Extents (L0, B0, 2*T0),
// waterline at z = 0, exactly mirror-symmetric in y.
inline HullMesh make_baseline_hull(const OracleConfig& cfg) {
  cfg.validate();
  const int stations = cfg.hull_stations;
  const int m = cfg.hull_ring_verts;
  const int rings = stations - 2;

  auto profile = [&](double xi) {
    // width fraction along the hull; slightly fore-aft asymmetric
    const double u = std::pow(xi, cfg.bow_shift);
    return std::pow(std::sin(3.14159265358979323846 * u), cfg.fullness);
  };

  std::vector<Vec3> verts;
  std::vector<HullMesh::Face> faces;
  verts.push_back({0.0, 0.0, 0.0});  // stern pole

  for (int i = 1; i <= rings; ++i) {
    const double xi = static_cast<double>(i) / (stations - 1);
    const double w = profile(xi);
    const double b = 0.5 * cfg.B0 * w;                  // half-beam
    const double c = cfg.T0 * std::pow(w, 0.7);         // vertical semi-axis
    const double x = cfg.L0 * xi;
    std::vector<Vec3> ring(m);
    for (int j = 0; j <= m / 2; ++j) {
      double y, z;
      if (j == 0) {
        y = 0.0;
        z = -c;  // keel
      } else if (j == m / 2) {
        y = 0.0;
        z = c;  // deck top
      } else {
        const double phi = 2.0 * 3.14159265358979323846 * j / m;
        y = b * std::sin(phi);
        z = -c * std::cos(phi);
      }
      ring[j] = {x, y, z};
      if (j > 0 && j < m / 2) ring[m - j] = {x, -y, z};  // exact mirror
    }
    for (const auto& v : ring) verts.push_back(v);
  }
  verts.push_back({cfg.L0, 0.0, 0.0});  // bow pole

  // normalize so the extents are exactly (L0, B0, 2*T0)
  double max_y = 0.0, max_depth = 0.0;
  for (const auto& v : verts) {
    max_y = std::max(max_y, std::abs(v.y));
    max_depth = std::max(max_depth, -v.z);
  }
  const double y_scale = 0.5 * cfg.B0 / max_y;
  const double z_scale = cfg.T0 / max_depth;
  for (auto& v : verts) {
    v.y *= y_scale;
    v.z *= z_scale;
  }

  const int stern = 0;
  const int bow = static_cast<int>(verts.size()) - 1;
  auto ring_vertex = [&](int ring, int j) { return 1 + ring * m + (j % m); };

  // stern fan
  for (int j = 0; j < m; ++j) faces.push_back({stern, ring_vertex(0, j + 1), ring_vertex(0, j)});
  // strips; the quad diagonal flips across the symmetry plane so the
  // triangulation (and with it every face centroid) is exactly y-mirrored
  for (int r = 0; r + 1 < rings; ++r) {
    for (int j = 0; j < m; ++j) {
      const int a = ring_vertex(r, j), b = ring_vertex(r, j + 1);
      const int c = ring_vertex(r + 1, j), d = ring_vertex(r + 1, j + 1);
      if (j < m / 2) {
        faces.push_back({a, b, d});
        faces.push_back({a, d, c});
      } else {
        faces.push_back({a, b, c});
        faces.push_back({b, d, c});
      }
    }
  }
  // bow fan
  for (int j = 0; j < m; ++j) faces.push_back({bow, ring_vertex(rings - 1, j), ring_vertex(rings - 1, j + 1)});

  HullMesh mesh(std::move(verts), std::move(faces));
  if (enclosed_volume(mesh) < 0.0) {
    // flip winding; orientation must be outward
    std::vector<HullMesh::Face> flipped = mesh.faces();
    for (auto& f : flipped) std::swap(f[1], f[2]);
    mesh = HullMesh(mesh.vertices(), std::move(flipped));
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// Analytic field model

namespace detail {

struct OracleFieldModel {
  const OracleConfig* cfg;
  const WaterConstants* water;
  double v_inf;
  double L;       // morphed hull length
  double x_min;   // morphed hull x origin
  double beam;    // morphed beam
  double draught;  // morphed draught (below z = 0)
  double fn;
  double wavelength;  // m
  double wave_k;      // 1 / m
  double hull_phase;  // rad, from the volume-centroid offset
  double eps_q;

  OracleFieldModel(const OracleConfig& c, const WaterConstants& w, const HullMesh& mesh, double v,
                   double midship)
      : cfg(&c), water(&w), v_inf(v) {
    x_min = mesh.min_corner().x;
    L = mesh.max_corner().x - x_min;
    beam = mesh.max_corner().y - mesh.min_corner().y;
    draught = -mesh.min_corner().z;
    fn = froude_number(v_inf, w.gravity, L);
    wavelength = 2.0 * 3.14159265358979323846 * fn * fn * L;
    wave_k = wavelength > 0.0 ? 2.0 * 3.14159265358979323846 / wavelength : 0.0;
    hull_phase = cfg->wave_phase_gain * (midship - 0.5);
    eps_q = std::max(c.q_eps_frac * draught, 1e-9);
  }

  double wave_elevation(double x, double y) const {
    if (v_inf <= 0.0) return 0.0;
    const double xt = x - x_min;
    return cfg->wave_amp * fn * fn * L * std::cos(wave_k * xt - hull_phase) *
           std::exp(-std::abs(y) / (cfg->wave_lateral_decay * L));
  }

  double water_fraction(double z, double zeta) const { return 1.0 / (1.0 + std::exp((z - zeta) / eps_q)); }

  // windward stagnation, leeward base suction, midbody suction
  double local_pressure_coef(const Vec3& n) const {
    const double wind = -n.x;
    const double head = wind >= 0.0 ? cfg->k_stag * wind * wind : -cfg->k_base * wind * wind;
    return head - cfg->k_suction * (1.0 - wind * wind);
  }

  double depth_decay(double z, double zeta) const {
    return std::exp(wave_k * std::min(z - zeta, 0.0));
  }

  double pressure(const Vec3& p, double q, double zeta, double c_loc) const {
    const double hydrostatic = -water->rho * water->gravity * p.z;
    const double wave =
        water->rho * water->gravity * zeta * depth_decay(p.z, zeta) * cfg->wave_pressure_gain;
    const double dyn = 0.5 * water->rho * v_inf * v_inf * c_loc;
    return water->p_atm + (hydrostatic + wave + dyn) * q;
  }

  double shear_magnitude() const {
    if (v_inf <= 0.0) return 0.0;
    const double re = v_inf * L / water->nu;
    return 0.5 * water->rho * v_inf * v_inf * friction_coefficient(cfg->friction, re);
  }

  Vec3 velocity(const Vec3& p, double q, double zeta, double dist, const Vec3& nearest_normal) const {
    const double d = std::abs(dist);
    const double wake = cfg->k_wake * std::exp(-d / (cfg->wake_decay * beam));
    const double ux = v_inf * (1.0 - wake * q);
    const double uy = 0.25 * v_inf * nearest_normal.y * std::exp(-d / (cfg->wake_decay * beam)) * q;
    const double uz = cfg->k_upwash * v_inf * std::sin(wave_k * (p.x - x_min)) *
                      std::exp(-std::abs(p.y) / (cfg->wave_lateral_decay * L)) * depth_decay(p.z, zeta) * q;
    return {ux, uy, uz};
  }
};

}  // namespace detail

struct SynthOptions {
  bool with_volume{true};
};

// Deterministic analytic fields for a (morphed) hull at the design's speed.
// Surface samples sit at face centroids, one per face; volume samples form a
// complete structured grid in a box around the hull.
inline FlowCase synth_case(const HullMesh& mesh, const DesignParams& params, const OracleConfig& cfg,
                           const WaterConstants& water, const SynthOptions& opt = {},
                           const std::string& case_id = "") {
  cfg.validate();
  FlowCase fc;
  fc.case_id = case_id;
  fc.mesh = mesh;
  fc.params = params;
  fc.v_inf = params.v_inf;
  fc.water = water;
  fc.L_pp = mesh.max_corner().x - mesh.min_corner().x;

  detail::OracleFieldModel model(cfg, water, mesh, params.v_inf, params.midship);
  const double tau = model.shear_magnitude();
  const Vec3 flow_dir{1.0, 0.0, 0.0};

  fc.samples.reserve(mesh.face_count());
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& g = mesh.face_geometry(f);
    const Vec3& c = g.centroid;
    FieldSample s;
    s.position = c;
    s.location = SampleClass::Surface;
    const double zeta = model.wave_elevation(c.x, c.y);
    s.q = model.water_fraction(c.z, zeta);
    s.p = model.pressure(c, s.q, zeta, model.local_pressure_coef(g.normal));
    const Vec3 tang = flow_dir - g.normal * dot(flow_dir, g.normal);
    const double tn = norm(tang);
    s.kappa = tn > 1e-12 ? (tang / tn) * (tau * s.q) : Vec3{0.0, 0.0, 0.0};
    fc.samples.push_back(s);
  }

  if (opt.with_volume) {
    const auto [gnx, gny, gnz] = cfg.volume_grid;
    const Vec3 lo = mesh.min_corner(), hi = mesh.max_corner();
    const double L = hi.x - lo.x, B = hi.y - lo.y, T = -lo.z;
    VolumeGridInfo grid;
    grid.nx = gnx;
    grid.ny = gny;
    grid.nz = gnz;
    grid.origin = {lo.x - 0.15 * L, lo.y - 0.5 * B, lo.z - 0.4 * T};
    const Vec3 span{1.3 * L, 2.0 * B, 0.4 * T + T + 0.8 * hi.z};
    grid.spacing = {span.x / (gnx - 1), span.y / (gny - 1), span.z / (gnz - 1)};
    fc.grid = grid;

    MeshBvh bvh(mesh);
    for (int ix = 0; ix < gnx; ++ix) {
      for (int iy = 0; iy < gny; ++iy) {
        for (int iz = 0; iz < gnz; ++iz) {
          const Vec3 p{grid.origin.x + ix * grid.spacing.x, grid.origin.y + iy * grid.spacing.y,
                       grid.origin.z + iz * grid.spacing.z};
          const SignedDistance sd = bvh.query(p);
          FieldSample s;
          s.position = p;
          s.location = SampleClass::Volume;
          const double zeta = model.wave_elevation(p.x, p.y);
          s.q = model.water_fraction(p.z, zeta);
          const double c_loc =
              model.local_pressure_coef(sd.normal) * std::exp(-std::abs(sd.distance) / (cfg.press_decay * B));
          s.p = model.pressure(p, s.q, zeta, c_loc);
          s.u = model.velocity(p, s.q, zeta, sd.distance, sd.normal);
          fc.samples.push_back(s);
        }
      }
    }
  }

  if (cfg.noise > 0.0) {
    Rng rng(substream_seed(cfg.seed, "oracle-noise/" + case_id));
    for (auto& s : fc.samples) {
      s.p = water.p_atm + (s.p - water.p_atm) * (1.0 + cfg.noise * rng.gaussian());
      s.q = std::clamp(s.q + 0.05 * cfg.noise * rng.gaussian(), 0.0, 1.0);
      if (s.kappa) *s.kappa = *s.kappa * (1.0 + cfg.noise * rng.gaussian());
      if (s.u) {
        s.u->x = params.v_inf + (s.u->x - params.v_inf) * (1.0 + cfg.noise * rng.gaussian());
        s.u->y *= 1.0 + cfg.noise * rng.gaussian();
        s.u->z *= 1.0 + cfg.noise * rng.gaussian();
      }
    }
  }
  return fc;
}

// Surface samples of a flow case in face order (the layout integrate_forces
// expects).
inline std::vector<FieldSample> surface_samples(const FlowCase& fc) {
  std::vector<FieldSample> out;
  for (const auto& s : fc.samples)
    if (s.location == SampleClass::Surface) out.push_back(s);
  return out;
}

// morph -> synthesize -> integrate; the ground-truth evaluator behind
// exploration, optimization and dataset generation.
class OracleEvaluator {
 public:
  OracleEvaluator(const OracleConfig& cfg, const WaterConstants& water)
      : cfg_(cfg), water_(water), baseline_(make_baseline_hull(cfg)) {}

  const HullMesh& baseline() const { return baseline_; }
  const OracleConfig& config() const { return cfg_; }

  HullMesh morphed(const DesignParams& params) const {
    return apply_morph(baseline_, params, cfg_.baseline_ratios(), cfg_.shift_amplitude());
  }

  FlowCase flow_case(const DesignParams& params, const SynthOptions& opt = {},
                     const std::string& case_id = "") const {
    return synth_case(morphed(params), params, cfg_, water_, opt, case_id);
  }

  // may throw MorphRejected for infeasible designs
  ForceVector resistance(const DesignParams& params) const {
    const FlowCase fc = flow_case(params, {.with_volume = false});
    return integrate_forces(fc.mesh, fc.samples, water_);
  }

 private:
  OracleConfig cfg_;
  WaterConstants water_;
  HullMesh baseline_;
};

inline ForceVector oracle_resistance(const DesignParams& params, const OracleConfig& cfg,
                                     const WaterConstants& water) {
  return OracleEvaluator(cfg, water).resistance(params);
}

}  // namespace hullopt
