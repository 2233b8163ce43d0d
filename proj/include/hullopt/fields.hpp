// Physical field containers and the post-treatments derived from them:
// non-dimensional coefficients, hull-surface force integration, free-surface
// extraction from the water volume fraction, and the relative-L1 metric.
//
// Force accumulation is a fixed-order sequential sum for bit reproducibility.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hullopt/errors.hpp"
#include "hullopt/mesh.hpp"
#include "hullopt/morph.hpp"

namespace hullopt {

enum class SampleClass : std::uint8_t { Surface = 0, Volume = 1 };

// Per-point fields. Surface samples carry (p, q, kappa); volume samples
// carry (p, q, u). The unused channel is absent, not zero-filled.
struct FieldSample {
  Vec3 position;
  SampleClass location{SampleClass::Surface};
  double p{0.0};  // pressure, Pa
  double q{0.0};  // water volume fraction, [0, 1]
  std::optional<Vec3> u;      // velocity, m/s (volume only)
  std::optional<Vec3> kappa;  // skin-friction stress, Pa (surface only)
};

struct WaterConstants {
  double rho{1025.0};      // kg/m^3, seawater
  double gravity{9.81};    // m/s^2
  double p_atm{101325.0};  // Pa
  double nu{1.19e-6};      // m^2/s, kinematic viscosity
};

struct VolumeGridInfo {
  int nx{0}, ny{0}, nz{0};
  Vec3 origin;
  Vec3 spacing;
};

struct FlowCase {
  std::string case_id;
  HullMesh mesh;
  DesignParams params;
  double v_inf{1.0};  // m/s
  WaterConstants water;
  double L_pp{1.0};  // m, reference length of this (morphed) hull
  std::vector<FieldSample> samples;
  std::optional<VolumeGridInfo> grid;  // layout of the volume samples, if structured
};

struct ForceVector {
  double fx{0.0}, fy{0.0}, fz{0.0};  // N
};

inline double froude_number(double v, double gravity, double L_pp) {
  return v / std::sqrt(gravity * L_pp);
}

inline double speed_from_froude(double fn, double gravity, double L_pp) {
  return fn * std::sqrt(gravity * L_pp);
}

// c_p = 2 (p + rho g z - p_atm) / (rho V^2)
inline double pressure_coefficient(double p, double z, const WaterConstants& w, double v_inf) {
  if (v_inf == 0.0) throw NumericError("pressure_coefficient: v_inf must be nonzero");
  return 2.0 * (p + w.rho * w.gravity * z - w.p_atm) / (w.rho * v_inf * v_inf);
}

// c_fx = 2 kappa_x / (rho S V^2)
inline double skin_friction_coefficient(double kappa_x, double wetted_area, const WaterConstants& w,
                                        double v_inf) {
  if (wetted_area <= 0.0) throw NumericError("skin_friction_coefficient: wetted area must be positive");
  if (v_inf == 0.0) throw NumericError("skin_friction_coefficient: v_inf must be nonzero");
  return 2.0 * kappa_x / (w.rho * wetted_area * v_inf * v_inf);
}

// S = sum_f q_f A_f
inline double wetted_surface_area(const HullMesh& mesh, const std::vector<double>& q_per_face) {
  if (q_per_face.size() != mesh.face_count())
    throw DataError("wetted_surface_area: " + std::to_string(q_per_face.size()) + " q values for " +
                    std::to_string(mesh.face_count()) + " faces");
  double s = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) s += q_per_face[f] * mesh.face_geometry(f).area;
  return s;
}

// F = sum_f q_f [ -(p_f + rho g z_f - p_atm) n_f + kappa_f ] A_f
//
// The hydrodynamic pressure (p + rho g z - p_atm), identical to the c_p
// numerator, acts along the inward normal; the still-water hydrostatic part
// cancels out so the reported force is hydrodynamic resistance. With
// include_hydrostatic only the atmospheric offset is removed.
inline ForceVector integrate_forces(const HullMesh& mesh, const std::vector<FieldSample>& surface_samples,
                                    const WaterConstants& w, bool include_hydrostatic = false) {
  if (surface_samples.size() != mesh.face_count())
    throw DataError("integrate_forces: " + std::to_string(surface_samples.size()) + " samples for " +
                    std::to_string(mesh.face_count()) + " faces");
  ForceVector out;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const FieldSample& s = surface_samples[f];
    if (s.location != SampleClass::Surface || !s.kappa.has_value())
      throw DataError("integrate_forces: sample " + std::to_string(f) + " is not a surface sample with kappa");
    const auto& g = mesh.face_geometry(f);
    const double z = s.position.z;
    const double p_dyn =
        include_hydrostatic ? (s.p - w.p_atm) : (s.p + w.rho * w.gravity * z - w.p_atm);
    const Vec3 df = (g.normal * (-p_dyn) + *s.kappa) * (s.q * g.area);
    out.fx += df.x;
    out.fy += df.y;
    out.fz += df.z;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Free-surface extraction

struct FreeSurfacePoint {
  double x{0.0}, y{0.0};
  double elevation{0.0};     // m
  double elevation_norm{0.0};  // elevation / L_pp
};

// Per (x, y) column of a complete structured grid, linearly interpolates the
// z at which q crosses `level`. q normally decreases with z (water below,
// air above); non-monotone columns use the highest crossing. Dry or fully
// submerged columns are excluded.
inline std::vector<FreeSurfacePoint> extract_free_surface(const std::vector<FieldSample>& volume_samples,
                                                          double level, double L_pp) {
  if (!(L_pp > 0.0)) throw DataError("extract_free_surface: L_pp must be positive");
  std::vector<double> xs, ys, zs;
  for (const auto& s : volume_samples) {
    if (s.location != SampleClass::Volume)
      throw DataError("extract_free_surface: expected volume samples only");
    xs.push_back(s.position.x);
    ys.push_back(s.position.y);
    zs.push_back(s.position.z);
  }
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(xs);
  uniq(ys);
  uniq(zs);
  const std::size_t nx = xs.size(), ny = ys.size(), nz = zs.size();
  if (nx * ny * nz != volume_samples.size())
    throw DataError("extract_free_surface: samples do not form a complete axis-aligned grid (" +
                    std::to_string(volume_samples.size()) + " samples vs " + std::to_string(nx) + "x" +
                    std::to_string(ny) + "x" + std::to_string(nz) + ")");
  auto index_of = [](const std::vector<double>& v, double x) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  // column-major q storage: q[ (ix*ny + iy)*nz + iz ]
  std::vector<double> q(volume_samples.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& s : volume_samples) {
    const std::size_t ix = index_of(xs, s.position.x);
    const std::size_t iy = index_of(ys, s.position.y);
    const std::size_t iz = index_of(zs, s.position.z);
    q[(ix * ny + iy) * nz + iz] = s.q;
  }
  for (double v : q)
    if (std::isnan(v)) throw DataError("extract_free_surface: duplicate or missing grid samples");

  std::vector<FreeSurfacePoint> out;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double* col = &q[(ix * ny + iy) * nz];
      // highest interval straddling the level
      for (std::size_t iz = nz - 1; iz >= 1; --iz) {
        const double q_lo = col[iz - 1], q_hi = col[iz];
        const bool crosses = (q_lo - level) * (q_hi - level) <= 0.0 && q_lo != q_hi;
        if (!crosses) continue;
        const double t = (level - q_lo) / (q_hi - q_lo);
        const double z = zs[iz - 1] + t * (zs[iz] - zs[iz - 1]);
        out.push_back({xs[ix], ys[iy], z, z / L_pp});
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Relative L1 metric

struct RelativeL1 {
  double mean{0.0};  // percent
  double sd{0.0};    // percent, population standard deviation
  std::vector<double> per_case;  // percent, cases with nonzero truth
  std::size_t n_used{0};
  std::size_t n_excluded{0};  // zero-truth cases, excluded with warning
};

inline RelativeL1 relative_l1(const std::vector<double>& predicted, const std::vector<double>& truth,
                              double zero_truth_eps = 1e-12) {
  if (predicted.size() != truth.size())
    throw DataError("relative_l1: series lengths differ (" + std::to_string(predicted.size()) + " vs " +
                    std::to_string(truth.size()) + ")");
  RelativeL1 r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (std::abs(truth[i]) <= zero_truth_eps) {
      ++r.n_excluded;
      continue;
    }
    r.per_case.push_back(std::abs(predicted[i] - truth[i]) / std::abs(truth[i]) * 100.0);
  }
  r.n_used = r.per_case.size();
  if (r.n_used == 0) {
    if (r.n_excluded > 0) return r;  // all-zero truth: empty metric, count reported
    throw DataError("relative_l1: empty series");
  }
  for (double v : r.per_case) r.mean += v;
  r.mean /= static_cast<double>(r.n_used);
  for (double v : r.per_case) r.sd += (v - r.mean) * (v - r.mean);
  r.sd = std::sqrt(r.sd / static_cast<double>(r.n_used));
  return r;
}

// ---------------------------------------------------------------------------
// FlowCase persistence: columnar binary snapshot plus a CSV export.
// Layout: magic, version, strings/scalars, mesh, optional grid info, then a
// channel manifest and one little-endian f64 column per channel.

namespace detail {

constexpr std::uint32_t kFlowCaseMagic = 0x42434648;  // "HFCB"
constexpr std::uint32_t kFlowCaseVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("unexpected end of file at byte " + std::to_string(in.tellg()));
  return v;
}

inline void write_string(std::ofstream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::ifstream& in) {
  const auto n = read_pod<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("unexpected end of file in string");
  return s;
}

inline void write_column(std::ofstream& out, const std::string& name, const std::vector<double>& col) {
  write_string(out, name);
  write_pod<std::uint64_t>(out, col.size());
  out.write(reinterpret_cast<const char*>(col.data()), static_cast<std::streamsize>(col.size() * 8));
}

inline std::vector<double> read_column(std::ifstream& in, const std::string& expect,
                                       const std::string& path) {
  const std::string name = read_string(in);
  if (name != expect) throw DataError(path + ": expected channel '" + expect + "', found '" + name + "'");
  const auto n = read_pod<std::uint64_t>(in);
  std::vector<double> col(n);
  in.read(reinterpret_cast<char*>(col.data()), static_cast<std::streamsize>(n * 8));
  if (!in) throw DataError(path + ": truncated channel '" + name + "'");
  return col;
}

}  // namespace detail

inline void save_flow_case(const FlowCase& fc, const std::string& path) {
  using namespace detail;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_pod(out, kFlowCaseMagic);
  write_pod(out, kFlowCaseVersion);
  write_string(out, fc.case_id);
  for (double v : fc.params.as_array()) write_pod(out, v);
  write_pod(out, fc.v_inf);
  write_pod(out, fc.water.rho);
  write_pod(out, fc.water.gravity);
  write_pod(out, fc.water.p_atm);
  write_pod(out, fc.water.nu);
  write_pod(out, fc.L_pp);
  write_pod<std::uint64_t>(out, fc.mesh.vertex_count());
  write_pod<std::uint64_t>(out, fc.mesh.face_count());
  for (const auto& v : fc.mesh.vertices()) {
    write_pod(out, v.x);
    write_pod(out, v.y);
    write_pod(out, v.z);
  }
  for (const auto& f : fc.mesh.faces())
    for (int k = 0; k < 3; ++k) write_pod<std::int32_t>(out, f[k]);
  write_pod<std::uint8_t>(out, fc.grid.has_value() ? 1 : 0);
  if (fc.grid) {
    write_pod<std::int32_t>(out, fc.grid->nx);
    write_pod<std::int32_t>(out, fc.grid->ny);
    write_pod<std::int32_t>(out, fc.grid->nz);
    for (double v : {fc.grid->origin.x, fc.grid->origin.y, fc.grid->origin.z, fc.grid->spacing.x,
                     fc.grid->spacing.y, fc.grid->spacing.z})
      write_pod(out, v);
  }

  std::vector<double> sx, sy, sz, sp, sq, kx, ky, kz;
  std::vector<double> vx, vy, vz, vp, vq, ux, uy, uz;
  for (const auto& s : fc.samples) {
    if (s.location == SampleClass::Surface) {
      if (!s.kappa) throw DataError("surface sample without kappa in case " + fc.case_id);
      sx.push_back(s.position.x);
      sy.push_back(s.position.y);
      sz.push_back(s.position.z);
      sp.push_back(s.p);
      sq.push_back(s.q);
      kx.push_back(s.kappa->x);
      ky.push_back(s.kappa->y);
      kz.push_back(s.kappa->z);
    } else {
      if (!s.u) throw DataError("volume sample without velocity in case " + fc.case_id);
      vx.push_back(s.position.x);
      vy.push_back(s.position.y);
      vz.push_back(s.position.z);
      vp.push_back(s.p);
      vq.push_back(s.q);
      ux.push_back(s.u->x);
      uy.push_back(s.u->y);
      uz.push_back(s.u->z);
    }
  }
  write_pod<std::uint32_t>(out, 16);  // channel count
  write_column(out, "s.x", sx);
  write_column(out, "s.y", sy);
  write_column(out, "s.z", sz);
  write_column(out, "s.p", sp);
  write_column(out, "s.q", sq);
  write_column(out, "s.kappa_x", kx);
  write_column(out, "s.kappa_y", ky);
  write_column(out, "s.kappa_z", kz);
  write_column(out, "v.x", vx);
  write_column(out, "v.y", vy);
  write_column(out, "v.z", vz);
  write_column(out, "v.p", vp);
  write_column(out, "v.q", vq);
  write_column(out, "v.u_x", ux);
  write_column(out, "v.u_y", uy);
  write_column(out, "v.u_z", uz);
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline FlowCase load_flow_case(const std::string& path) {
  using namespace detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  if (read_pod<std::uint32_t>(in) != kFlowCaseMagic) throw DataError(path + ": not a flow-case file");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kFlowCaseVersion)
    throw DataError(path + ": unsupported version " + std::to_string(version));
  FlowCase fc;
  fc.case_id = read_string(in);
  std::array<double, kParamCount> pa{};
  for (auto& v : pa) v = read_pod<double>(in);
  fc.params = DesignParams::from_array(pa);
  fc.v_inf = read_pod<double>(in);
  fc.water.rho = read_pod<double>(in);
  fc.water.gravity = read_pod<double>(in);
  fc.water.p_atm = read_pod<double>(in);
  fc.water.nu = read_pod<double>(in);
  fc.L_pp = read_pod<double>(in);
  const auto nv = read_pod<std::uint64_t>(in);
  const auto nf = read_pod<std::uint64_t>(in);
  std::vector<Vec3> verts(nv);
  for (auto& v : verts) {
    v.x = read_pod<double>(in);
    v.y = read_pod<double>(in);
    v.z = read_pod<double>(in);
  }
  std::vector<HullMesh::Face> faces(nf);
  for (auto& f : faces)
    for (int k = 0; k < 3; ++k) f[k] = read_pod<std::int32_t>(in);
  fc.mesh = HullMesh(std::move(verts), std::move(faces));
  if (read_pod<std::uint8_t>(in) == 1) {
    VolumeGridInfo g;
    g.nx = read_pod<std::int32_t>(in);
    g.ny = read_pod<std::int32_t>(in);
    g.nz = read_pod<std::int32_t>(in);
    g.origin = {read_pod<double>(in), read_pod<double>(in), read_pod<double>(in)};
    g.spacing = {read_pod<double>(in), read_pod<double>(in), read_pod<double>(in)};
    fc.grid = g;
  }
  const auto channels = read_pod<std::uint32_t>(in);
  if (channels != 16) throw DataError(path + ": unexpected channel count " + std::to_string(channels));
  const auto sx = read_column(in, "s.x", path);
  const auto sy = read_column(in, "s.y", path);
  const auto sz = read_column(in, "s.z", path);
  const auto sp = read_column(in, "s.p", path);
  const auto sq = read_column(in, "s.q", path);
  const auto kx = read_column(in, "s.kappa_x", path);
  const auto ky = read_column(in, "s.kappa_y", path);
  const auto kz = read_column(in, "s.kappa_z", path);
  const auto vx = read_column(in, "v.x", path);
  const auto vy = read_column(in, "v.y", path);
  const auto vz = read_column(in, "v.z", path);
  const auto vp = read_column(in, "v.p", path);
  const auto vq = read_column(in, "v.q", path);
  const auto ux = read_column(in, "v.u_x", path);
  const auto uy = read_column(in, "v.u_y", path);
  const auto uz = read_column(in, "v.u_z", path);
  for (std::size_t i = 0; i < sx.size(); ++i) {
    FieldSample s;
    s.position = {sx[i], sy[i], sz[i]};
    s.location = SampleClass::Surface;
    s.p = sp[i];
    s.q = sq[i];
    s.kappa = Vec3{kx[i], ky[i], kz[i]};
    fc.samples.push_back(s);
  }
  for (std::size_t i = 0; i < vx.size(); ++i) {
    FieldSample s;
    s.position = {vx[i], vy[i], vz[i]};
    s.location = SampleClass::Volume;
    s.p = vp[i];
    s.q = vq[i];
    s.u = Vec3{ux[i], uy[i], uz[i]};
    fc.samples.push_back(s);
  }
  return fc;
}

inline void export_flow_case_csv(const FlowCase& fc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "class,x,y,z,p,q,u_x,u_y,u_z,kappa_x,kappa_y,kappa_z\n";
  auto num = [](double v) {
    char b[40];
    std::snprintf(b, sizeof(b), "%.17g", v);
    return std::string(b);
  };
  for (const auto& s : fc.samples) {
    const bool surf = s.location == SampleClass::Surface;
    std::string line = surf ? "surface" : "volume";
    for (double v : {s.position.x, s.position.y, s.position.z, s.p, s.q}) line += "," + num(v);
    if (s.u)
      line += "," + num(s.u->x) + "," + num(s.u->y) + "," + num(s.u->z);
    else
      line += ",,,";
    if (s.kappa)
      line += "," + num(s.kappa->x) + "," + num(s.kappa->y) + "," + num(s.kappa->z);
    else
      line += ",,,";
    out << line << '\n';
  }
}

}  // namespace hullopt
