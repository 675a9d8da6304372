#pragma once

// Closed, consistently oriented triangle meshes and the octahedron-based
// sphere sequence.

#include <Eigen/Dense>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

namespace fastbem {

using Point3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Flat-panel triangle mesh. Triangles are counter-clockwise when seen from
/// the exterior; normals and areas are derived on construction.
class SurfaceMesh {
public:
  SurfaceMesh() = default;

  SurfaceMesh(std::vector<Point3> vertices, std::vector<Triangle> triangles)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const int nv = static_cast<int>(vertices_.size());
    for (const auto &v : vertices_)
      if (!v.allFinite())
        throw MeshError("mesh vertex with non-finite coordinate");
    normals_.reserve(triangles_.size());
    areas_.reserve(triangles_.size());
    star_offsets_.assign(vertices_.size() + 1, 0);
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      const auto &tri = triangles_[t];
      for (int k = 0; k < 3; ++k) {
        if (tri[k] < 0 || tri[k] >= nv)
          throw MeshError("triangle " + std::to_string(t) +
                          " references vertex " + std::to_string(tri[k]) +
                          " outside [0," + std::to_string(nv) + ")");
        ++star_offsets_[tri[k] + 1];
      }
      const Point3 c = (vertices_[tri[1]] - vertices_[tri[0]])
                           .cross(vertices_[tri[2]] - vertices_[tri[0]]);
      const double twice_area = c.norm();
      if (!(twice_area > 0.0))
        throw MeshError("triangle " + std::to_string(t) + " is degenerate");
      normals_.push_back(c / twice_area);
      areas_.push_back(0.5 * twice_area);
    }
    for (std::size_t v = 0; v < vertices_.size(); ++v)
      star_offsets_[v + 1] += star_offsets_[v];
    star_.resize(star_offsets_.back());
    std::vector<int> fill(star_offsets_.begin(), star_offsets_.end() - 1);
    for (std::size_t t = 0; t < triangles_.size(); ++t)
      for (int k = 0; k < 3; ++k)
        star_[fill[triangles_[t][k]]++] = {static_cast<int>(t), k};
  }

  /// Incident triangle together with the local corner index of the vertex.
  struct Incidence {
    int triangle;
    int corner;
  };

  [[nodiscard]] int vertex_count() const {
    return static_cast<int>(vertices_.size());
  }
  [[nodiscard]] int triangle_count() const {
    return static_cast<int>(triangles_.size());
  }
  [[nodiscard]] const std::vector<Point3> &vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Triangle> &triangles() const {
    return triangles_;
  }
  [[nodiscard]] const Point3 &vertex(int v) const { return vertices_[v]; }
  [[nodiscard]] const Triangle &triangle(int t) const { return triangles_[t]; }
  [[nodiscard]] const Point3 &normal(int t) const { return normals_[t]; }
  [[nodiscard]] double area(int t) const { return areas_[t]; }
  [[nodiscard]] const Point3 &corner(int t, int k) const {
    return vertices_[triangles_[t][k]];
  }

  /// Triangles incident to vertex v.
  [[nodiscard]] std::vector<Incidence> star(int v) const {
    return {star_.begin() + star_offsets_[v],
            star_.begin() + star_offsets_[v + 1]};
  }
  [[nodiscard]] const Incidence *star_begin(int v) const {
    return star_.data() + star_offsets_[v];
  }
  [[nodiscard]] const Incidence *star_end(int v) const {
    return star_.data() + star_offsets_[v + 1];
  }

  [[nodiscard]] double surface_area() const {
    double s = 0.0;
    for (double a : areas_) s += a;
    return s;
  }

private:
  std::vector<Point3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Point3> normals_;
  std::vector<double> areas_;
  std::vector<int> star_offsets_;
  std::vector<Incidence> star_;
};

/// Throws MeshError unless every edge is shared by exactly two triangles that
/// traverse it in opposite directions.
inline void validate(const SurfaceMesh &mesh) {
  std::map<std::pair<int, int>, int> directed;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto &tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) {
      const std::pair<int, int> e{tri[k], tri[(k + 1) % 3]};
      if (e.first == e.second)
        throw MeshError("triangle " + std::to_string(t) +
                        " repeats vertex " + std::to_string(e.first));
      if (!directed.emplace(e, t).second)
        throw MeshError("edge (" + std::to_string(e.first) + "," +
                        std::to_string(e.second) +
                        ") traversed twice in the same direction "
                        "(inconsistent orientation or non-manifold)");
    }
  }
  for (const auto &[e, t] : directed) {
    if (!directed.count({e.second, e.first}))
      throw MeshError("open edge (" + std::to_string(e.first) + "," +
                      std::to_string(e.second) + ") of triangle " +
                      std::to_string(t));
  }
}

/// The double pyramid |x1|+|x2|+|x3| = 1.
inline SurfaceMesh build_octahedron() {
  std::vector<Point3> v{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                        {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<Triangle> tris;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) {
        const int a = sx > 0 ? 0 : 1;
        const int b = sy > 0 ? 2 : 3;
        const int c = sz > 0 ? 4 : 5;
        if (sx * sy * sz > 0)
          tris.push_back({a, b, c});
        else
          tris.push_back({a, c, b});
      }
  return {std::move(v), std::move(tris)};
}

/// Regular (red) refinement: every triangle is split into four through its
/// edge midpoints.
inline SurfaceMesh refine_red(const SurfaceMesh &mesh) {
  std::vector<Point3> v = mesh.vertices();
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    v.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    const int idx = static_cast<int>(v.size()) - 1;
    midpoint.emplace(key, idx);
    return idx;
  };
  std::vector<Triangle> tris;
  tris.reserve(4 * mesh.triangles().size());
  for (const auto &t : mesh.triangles()) {
    const int ab = mid(t[0], t[1]);
    const int bc = mid(t[1], t[2]);
    const int ca = mid(t[2], t[0]);
    tris.push_back({t[0], ab, ca});
    tris.push_back({ab, t[1], bc});
    tris.push_back({ca, bc, t[2]});
    tris.push_back({ab, bc, ca});
  }
  return {std::move(v), std::move(tris)};
}

inline SurfaceMesh project_unit_sphere(const SurfaceMesh &mesh) {
  std::vector<Point3> v = mesh.vertices();
  for (auto &p : v) {
    const double r = p.norm();
    if (!(r > 0.0)) throw MeshError("cannot project vertex at the origin");
    p /= r;
  }
  return {std::move(v), mesh.triangles()};
}

/// Octahedron refined `level` times, projecting onto the unit sphere after
/// every refinement pass.
inline SurfaceMesh sphere_mesh(int level) {
  if (level < 0) throw std::invalid_argument("sphere level must be >= 0");
  SurfaceMesh m = build_octahedron();
  for (int l = 0; l < level; ++l) m = project_unit_sphere(refine_red(m));
  return m;
}

/// Maximal edge length.
inline double mesh_width(const SurfaceMesh &mesh) {
  double h = 0.0;
  for (const auto &t : mesh.triangles())
    for (int k = 0; k < 3; ++k)
      h = std::max(h, (mesh.vertex(t[k]) - mesh.vertex(t[(k + 1) % 3])).norm());
  return h;
}

/// Enclosed volume via the divergence theorem; positive for outward normals.
inline double signed_volume(const SurfaceMesh &mesh) {
  double vol = 0.0;
  for (const auto &t : mesh.triangles())
    vol += mesh.vertex(t[0]).dot(mesh.vertex(t[1]).cross(mesh.vertex(t[2])));
  return vol / 6.0;
}

namespace detail {
inline std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}
} // namespace detail

/// Text format: "V F", V lines "x y z", F lines "i j k" (0-based).
inline void write_mesh(const SurfaceMesh &mesh, std::ostream &out) {
  out << mesh.vertex_count() << ' ' << mesh.triangle_count() << '\n';
  for (const auto &p : mesh.vertices())
    out << detail::shortest(p.x()) << ' ' << detail::shortest(p.y()) << ' '
        << detail::shortest(p.z()) << '\n';
  for (const auto &t : mesh.triangles())
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline void write_mesh(const SurfaceMesh &mesh, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open " + path + " for writing");
  write_mesh(mesh, out);
}

/// Parses the text format and validates the surface.
inline SurfaceMesh read_mesh(std::istream &in) {
  std::string line;
  int lineno = 0;
  auto next = [&](const char *what) -> std::istringstream {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        return std::istringstream(line);
    }
    throw MeshError("line " + std::to_string(lineno + 1) + ": expected " +
                    what + ", got end of file");
  };
  auto fail = [&](const std::string &msg) {
    return MeshError("line " + std::to_string(lineno) + ": " + msg);
  };
  long nv = -1, nf = -1;
  {
    auto s = next("header \"V F\"");
    if (!(s >> nv >> nf) || nv < 0 || nf < 0) throw fail("malformed header");
  }
  std::vector<Point3> v(nv);
  for (long i = 0; i < nv; ++i) {
    auto s = next("vertex");
    std::string tok[3];
    if (!(s >> tok[0] >> tok[1] >> tok[2])) throw fail("malformed vertex");
    for (int k = 0; k < 3; ++k) {
      const auto *b = tok[k].data();
      const auto *e = b + tok[k].size();
      auto r = std::from_chars(b, e, v[i][k]);
      if (r.ec != std::errc{} || r.ptr != e)
        throw fail("malformed coordinate '" + tok[k] + "'");
    }
  }
  std::vector<Triangle> f(nf);
  for (long i = 0; i < nf; ++i) {
    auto s = next("triangle");
    long a, b, c;
    if (!(s >> a >> b >> c)) throw fail("malformed triangle");
    for (long idx : {a, b, c})
      if (idx < 0 || idx >= nv)
        throw fail("vertex index " + std::to_string(idx) + " out of range [0," +
                   std::to_string(nv) + ")");
    f[i] = {static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
  }
  SurfaceMesh mesh(std::move(v), std::move(f));
  validate(mesh);
  return mesh;
}

inline SurfaceMesh read_mesh(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path);
  return read_mesh(in);
}

} // namespace fastbem
