// Indexed triangle surface mesh with OBJ/STL I/O, derived face geometry,
// enclosed volume, and BVH-accelerated nearest-point queries.
//
// Conventions:
// - Units are meters. Hull-fixed frame: x longitudinal (bow positive),
//   z vertical (up positive), waterline at z = 0.
// - Faces are triangles, indices 0-based in memory (OBJ I/O converts).
// - Meshes are immutable after construction; derived per-face normals,
//   areas and centroids are computed once. All free functions are pure.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hullopt/errors.hpp"
#include "hullopt/vec3.hpp"

namespace hullopt {

constexpr double kDegenerateFaceArea = 1e-12;  // m^2

struct FaceGeometry {
  Vec3 normal;    // unit, right-hand rule over (v0,v1,v2)
  double area;    // m^2
  Vec3 centroid;  // vertex mean
};

struct MeshTopology {
  std::size_t boundary_edges{0};     // edges on exactly 1 face
  std::size_t non_manifold_edges{0};  // edges on 3+ faces
  bool watertight() const { return boundary_edges == 0 && non_manifold_edges == 0; }
};

class HullMesh {
 public:
  using Face = std::array<int, 3>;

  HullMesh() = default;

  HullMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
      : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    validate_and_derive();
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t face_count() const { return faces_.size(); }

  const FaceGeometry& face_geometry(std::size_t f) const { return geometry_[f]; }
  const std::vector<FaceGeometry>& face_geometries() const { return geometry_; }

  double total_area() const {
    double a = 0.0;
    for (const auto& g : geometry_) a += g.area;
    return a;
  }

  // Same topology, new vertex positions.
  HullMesh with_vertices(std::vector<Vec3> vertices) const {
    return HullMesh(std::move(vertices), faces_);
  }

  Vec3 min_corner() const { return min_corner_; }
  Vec3 max_corner() const { return max_corner_; }

  MeshTopology topology() const {
    MeshTopology t;
    std::unordered_map<std::uint64_t, int> edge_count;
    edge_count.reserve(faces_.size() * 3);
    for (const auto& f : faces_) {
      for (int e = 0; e < 3; ++e) {
        const int a = f[e], b = f[(e + 1) % 3];
        const std::uint64_t key =
            (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint32_t>(std::max(a, b));
        ++edge_count[key];
      }
    }
    for (const auto& [key, n] : edge_count) {
      (void)key;
      if (n == 1) ++t.boundary_edges;
      if (n > 2) ++t.non_manifold_edges;
    }
    return t;
  }

 private:
  void validate_and_derive() {
    const int nv = static_cast<int>(vertices_.size());
    std::vector<std::size_t> degenerate;
    geometry_.resize(faces_.size());
    min_corner_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                   std::numeric_limits<double>::max()};
    max_corner_ = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
                   std::numeric_limits<double>::lowest()};
    for (const auto& v : vertices_) {
      min_corner_ = {std::min(min_corner_.x, v.x), std::min(min_corner_.y, v.y), std::min(min_corner_.z, v.z)};
      max_corner_ = {std::max(max_corner_.x, v.x), std::max(max_corner_.y, v.y), std::max(max_corner_.z, v.z)};
    }
    for (std::size_t i = 0; i < faces_.size(); ++i) {
      const auto& f = faces_[i];
      for (int k = 0; k < 3; ++k) {
        if (f[k] < 0 || f[k] >= nv) {
          throw DataError("face " + std::to_string(i) + ": vertex index " + std::to_string(f[k]) +
                          " out of range [0, " + std::to_string(nv) + ")");
        }
      }
      const Vec3& a = vertices_[f[0]];
      const Vec3& b = vertices_[f[1]];
      const Vec3& c = vertices_[f[2]];
      const Vec3 n = cross(b - a, c - a);
      const double len = norm(n);
      const double area = 0.5 * len;
      if (area <= kDegenerateFaceArea) {
        degenerate.push_back(i);
        continue;
      }
      geometry_[i] = {n / len, area, (a + b + c) / 3.0};
    }
    if (!degenerate.empty()) {
      std::string msg = "degenerate faces (area <= 1e-12 m^2):";
      for (std::size_t k = 0; k < degenerate.size() && k < 8; ++k) msg += " " + std::to_string(degenerate[k]);
      if (degenerate.size() > 8) msg += " ... (" + std::to_string(degenerate.size()) + " total)";
      throw DataError(msg);
    }
  }

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<FaceGeometry> geometry_;
  Vec3 min_corner_{}, max_corner_{};
};

// Signed divergence-theorem volume: positive when faces are consistently
// outward-oriented. Exact for polyhedra.
inline double enclosed_volume(const HullMesh& mesh) {
  const auto topo = mesh.topology();
  if (topo.boundary_edges > 0) {
    throw DataError("enclosed_volume requires a watertight mesh; found " +
                    std::to_string(topo.boundary_edges) + " boundary edges");
  }
  double v = 0.0;
  for (const auto& g : mesh.face_geometries()) v += dot(g.centroid, g.normal) * g.area;
  return v / 3.0;
}

// x-coordinate of the enclosed-volume centroid. Uses the divergence theorem
// with an edge-midpoint quadrature (exact for polyhedra). Falls back to the
// bounding-box midpoint for open or near-degenerate meshes.
inline double volume_centroid_x(const HullMesh& mesh) {
  double moment = 0.0, volume = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces()[f];
    const auto& g = mesh.face_geometry(f);
    const double xa = mesh.vertices()[face[0]].x;
    const double xb = mesh.vertices()[face[1]].x;
    const double xc = mesh.vertices()[face[2]].x;
    const double m1 = 0.5 * (xa + xb), m2 = 0.5 * (xb + xc), m3 = 0.5 * (xc + xa);
    const double x2 = (m1 * m1 + m2 * m2 + m3 * m3) / 3.0;  // mean of x^2 over the face
    moment += 0.5 * x2 * g.normal.x * g.area;
    volume += dot(g.centroid, g.normal) * g.area / 3.0;
  }
  const double extent = mesh.max_corner().x - mesh.min_corner().x;
  if (std::abs(volume) < 1e-12 * extent * extent * extent + 1e-300)
    return 0.5 * (mesh.min_corner().x + mesh.max_corner().x);
  return moment / volume;
}

// ---------------------------------------------------------------------------
// Closest-point queries

inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + ab * v;
  }
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + ac * w;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + (c - b) * w;
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return a + ab * v + ac * w;
}

struct SignedDistance {
  double distance{0.0};  // signed; negative inside (watertight meshes)
  Vec3 normal;           // nearest face's unit normal
  Vec3 closest_point;
  int face{-1};
};

// Median-split AABB tree. Queries agree exactly with a brute-force scan over
// all faces; ties on distance resolve to the lowest face index.
class MeshBvh {
 public:
  explicit MeshBvh(const HullMesh& mesh) : mesh_(&mesh) {
    const std::size_t n = mesh.face_count();
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) order_[i] = static_cast<int>(i);
    boxes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) boxes_[i] = face_box(static_cast<int>(i));
    if (n > 0) {
      nodes_.reserve(2 * n);
      build(0, n);
    }
  }

  SignedDistance query(const Vec3& p) const {
    SignedDistance best;
    best.distance = std::numeric_limits<double>::max();
    if (nodes_.empty()) return best;
    double best_d2 = std::numeric_limits<double>::max();
    query_node(0, p, best, best_d2);
    best.distance = std::sqrt(best_d2);
    // inside/outside heuristic: below the nearest face plane means inside
    if (dot(p - best.closest_point, best.normal) < 0.0) best.distance = -best.distance;
    return best;
  }

 private:
  struct Box {
    Vec3 lo, hi;
  };
  struct Node {
    Box box;
    int left{-1}, right{-1};  // children, or
    int first{-1}, count{0};  // leaf range in order_
  };

  Box face_box(int f) const {
    const auto& fc = mesh_->faces()[f];
    Box b{mesh_->vertices()[fc[0]], mesh_->vertices()[fc[0]]};
    for (int k = 1; k < 3; ++k) {
      const Vec3& v = mesh_->vertices()[fc[k]];
      b.lo = {std::min(b.lo.x, v.x), std::min(b.lo.y, v.y), std::min(b.lo.z, v.z)};
      b.hi = {std::max(b.hi.x, v.x), std::max(b.hi.y, v.y), std::max(b.hi.z, v.z)};
    }
    return b;
  }

  static Box merge(const Box& a, const Box& b) {
    return {{std::min(a.lo.x, b.lo.x), std::min(a.lo.y, b.lo.y), std::min(a.lo.z, b.lo.z)},
            {std::max(a.hi.x, b.hi.x), std::max(a.hi.y, b.hi.y), std::max(a.hi.z, b.hi.z)}};
  }

  static double box_dist2(const Box& b, const Vec3& p) {
    const double dx = std::max({b.lo.x - p.x, 0.0, p.x - b.hi.x});
    const double dy = std::max({b.lo.y - p.y, 0.0, p.y - b.hi.y});
    const double dz = std::max({b.lo.z - p.z, 0.0, p.z - b.hi.z});
    return dx * dx + dy * dy + dz * dz;
  }

  int build(std::size_t first, std::size_t count) {
    Node node;
    node.box = boxes_[order_[first]];
    for (std::size_t i = first + 1; i < first + count; ++i) node.box = merge(node.box, boxes_[order_[i]]);
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (count <= 4) {
      nodes_[idx].first = static_cast<int>(first);
      nodes_[idx].count = static_cast<int>(count);
      return idx;
    }
    const Vec3 ext = node.box.hi - node.box.lo;
    const int axis = (ext.x >= ext.y && ext.x >= ext.z) ? 0 : (ext.y >= ext.z ? 1 : 2);
    auto center = [&](int f) {
      const Box& b = boxes_[f];
      return axis == 0 ? b.lo.x + b.hi.x : (axis == 1 ? b.lo.y + b.hi.y : b.lo.z + b.hi.z);
    };
    // stable ordering keeps builds deterministic
    std::sort(order_.begin() + first, order_.begin() + first + count, [&](int a, int b) {
      const double ca = center(a), cb = center(b);
      return ca < cb || (ca == cb && a < b);
    });
    const std::size_t half = count / 2;
    const int l = build(first, half);
    const int r = build(first + half, count - half);
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    return idx;
  }

  void query_node(int ni, const Vec3& p, SignedDistance& best, double& best_d2) const {
    const Node& node = nodes_[ni];
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = order_[i];
        const auto& fc = mesh_->faces()[f];
        const Vec3 q = closest_point_on_triangle(p, mesh_->vertices()[fc[0]], mesh_->vertices()[fc[1]],
                                                 mesh_->vertices()[fc[2]]);
        const double d2 = norm2(p - q);
        if (d2 < best_d2 || (d2 == best_d2 && f < best.face)) {
          best_d2 = d2;
          best.face = f;
          best.closest_point = q;
          best.normal = mesh_->face_geometry(f).normal;
        }
      }
      return;
    }
    const double dl = box_dist2(nodes_[node.left].box, p);
    const double dr = box_dist2(nodes_[node.right].box, p);
    const int near = dl <= dr ? node.left : node.right;
    const int far = dl <= dr ? node.right : node.left;
    const double dn = std::min(dl, dr), df = std::max(dl, dr);
    if (dn <= best_d2) query_node(near, p, best, best_d2);
    if (df <= best_d2) query_node(far, p, best, best_d2);
  }

  const HullMesh* mesh_;
  std::vector<int> order_;
  std::vector<Box> boxes_;
  std::vector<Node> nodes_;
};

inline SignedDistance signed_distance(const HullMesh& mesh, const Vec3& point) {
  return MeshBvh(mesh).query(point);
}

// ---------------------------------------------------------------------------
// File I/O. Format deduced from extension: .obj (ASCII) or .stl (binary or
// ASCII, sniffed). OBJ writing round-trips coordinates bit-exactly.

namespace detail {

inline std::string lower_ext(const std::string& path) {
  const auto pos = path.find_last_of('.');
  if (pos == std::string::npos) return "";
  std::string ext = path.substr(pos + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

inline HullMesh load_obj(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<Vec3> vertices;
  std::vector<HullMesh::Face> faces;
  std::string line;
  std::size_t lineno = 0;
  auto parse_index = [&](const std::string& tok) {
    // OBJ faces may carry /vt/vn parts; only the vertex index matters here
    const auto slash = tok.find('/');
    const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
    std::size_t pos = 0;
    long idx = 0;
    try {
      idx = std::stol(head, &pos);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
    }
    if (pos != head.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
    if (idx < 0) idx = static_cast<long>(vertices.size()) + 1 + idx;  // negative = relative
    if (idx < 1 || idx > static_cast<long>(vertices.size())) {
      throw DataError(path + ":" + std::to_string(lineno) + ": face " + std::to_string(faces.size()) +
                      " references vertex " + std::to_string(idx) + " of " + std::to_string(vertices.size()));
    }
    return static_cast<int>(idx - 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x >> v.y >> v.z))
        throw DataError(path + ":" + std::to_string(lineno) + ": malformed vertex record");
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) idx.push_back(parse_index(tok));
      if (idx.size() < 3)
        throw DataError(path + ":" + std::to_string(lineno) + ": face needs at least 3 vertices");
      for (std::size_t k = 2; k < idx.size(); ++k) faces.push_back({idx[0], idx[k - 1], idx[k]});
    }
    // other records (vn, vt, o, g, usemtl, #) are ignored
  }
  HullMesh mesh(std::move(vertices), std::move(faces));
  if (warnings) {
    const auto topo = mesh.topology();
    if (topo.non_manifold_edges > 0)
      warnings->push_back("non-manifold mesh: " + std::to_string(topo.non_manifold_edges) + " edges on 3+ faces");
  }
  return mesh;
}

inline void save_obj(const HullMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  char buf[128];
  for (const auto& v : mesh.vertices()) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

// Welds exactly-equal coordinates so STL soup becomes an indexed mesh.
class VertexWelder {
 public:
  int index_of(const Vec3& v, std::vector<Vec3>& vertices) {
    std::array<std::uint64_t, 3> key;
    std::memcpy(key.data(), &v, sizeof(key));
    const std::string sk(reinterpret_cast<const char*>(key.data()), sizeof(key));
    auto [it, inserted] = map_.try_emplace(sk, static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(v);
    return it->second;
  }

 private:
  std::unordered_map<std::string, int> map_;
};

inline HullMesh load_stl(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0);
  std::vector<Vec3> vertices;
  std::vector<HullMesh::Face> faces;
  VertexWelder welder;

  bool binary = false;
  if (size >= 84) {
    char header[84];
    in.read(header, 84);
    std::uint32_t count;
    std::memcpy(&count, header + 80, 4);
    if (size == static_cast<std::streamoff>(84) + static_cast<std::streamoff>(count) * 50) binary = true;
    in.seekg(0);
  }

  if (binary) {
    in.seekg(80);
    std::uint32_t count;
    in.read(reinterpret_cast<char*>(&count), 4);
    for (std::uint32_t t = 0; t < count; ++t) {
      float rec[12];
      in.read(reinterpret_cast<char*>(rec), 48);
      std::uint16_t attr;
      in.read(reinterpret_cast<char*>(&attr), 2);
      if (!in) throw DataError(path + ": truncated at triangle " + std::to_string(t) + " (byte offset " +
                               std::to_string(84 + static_cast<std::size_t>(t) * 50) + ")");
      HullMesh::Face f;
      for (int k = 0; k < 3; ++k) {
        const Vec3 v{rec[3 + 3 * k], rec[4 + 3 * k], rec[5 + 3 * k]};
        f[k] = welder.index_of(v, vertices);
      }
      faces.push_back(f);
    }
  } else {
    std::string tok;
    std::size_t tri = 0;
    std::vector<Vec3> tri_verts;
    while (in >> tok) {
      if (tok == "vertex") {
        Vec3 v;
        if (!(in >> v.x >> v.y >> v.z))
          throw DataError(path + ": malformed vertex in triangle " + std::to_string(tri));
        tri_verts.push_back(v);
        if (tri_verts.size() == 3) {
          HullMesh::Face f;
          for (int k = 0; k < 3; ++k) f[k] = welder.index_of(tri_verts[k], vertices);
          faces.push_back(f);
          tri_verts.clear();
          ++tri;
        }
      }
    }
    if (!tri_verts.empty()) throw DataError(path + ": dangling vertices in triangle " + std::to_string(tri));
    if (faces.empty()) throw DataError(path + ": no facets found");
  }

  HullMesh mesh(std::move(vertices), std::move(faces));
  if (warnings) {
    const auto topo = mesh.topology();
    if (topo.non_manifold_edges > 0)
      warnings->push_back("non-manifold mesh: " + std::to_string(topo.non_manifold_edges) + " edges on 3+ faces");
  }
  return mesh;
}

inline void save_stl(const HullMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  char header[80] = "hullopt binary stl";
  out.write(header, 80);
  const std::uint32_t count = static_cast<std::uint32_t>(mesh.face_count());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (std::size_t i = 0; i < mesh.face_count(); ++i) {
    const auto& g = mesh.face_geometry(i);
    float rec[12] = {static_cast<float>(g.normal.x), static_cast<float>(g.normal.y),
                     static_cast<float>(g.normal.z)};
    for (int k = 0; k < 3; ++k) {
      const Vec3& v = mesh.vertices()[mesh.faces()[i][k]];
      rec[3 + 3 * k] = static_cast<float>(v.x);
      rec[4 + 3 * k] = static_cast<float>(v.y);
      rec[5 + 3 * k] = static_cast<float>(v.z);
    }
    out.write(reinterpret_cast<const char*>(rec), 48);
    const std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace detail

inline HullMesh load_mesh(const std::string& path, std::vector<std::string>* warnings = nullptr) {
  const std::string ext = detail::lower_ext(path);
  if (ext == "obj") return detail::load_obj(path, warnings);
  if (ext == "stl") return detail::load_stl(path, warnings);
  throw DataError("unsupported mesh format '." + ext + "' (expected .obj or .stl): " + path);
}

inline void save_mesh(const HullMesh& mesh, const std::string& path) {
  const std::string ext = detail::lower_ext(path);
  if (ext == "obj") return detail::save_obj(mesh, path);
  if (ext == "stl") return detail::save_stl(mesh, path);
  throw DataError("unsupported mesh format '." + ext + "' (expected .obj or .stl): " + path);
}

}  // namespace hullopt
