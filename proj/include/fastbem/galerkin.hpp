#pragma once

// Galerkin entries of the single-layer, double-layer and hypersingular
// operators, and the single surface integrals (potentials) used by the
// compression schemes.

#include "box.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastbem {

/// Piecewise constants on triangles or continuous piecewise linears on
/// vertices.
enum class Space { P0, P1 };

/// What the kernel sees on one side of a bilinear form: the plain kernel or
/// its normal derivative with respect to that side's argument.
enum class Trace { value, normal };

struct SideSpec {
  Space space;
  Trace trace;
  friend bool operator==(const SideSpec &, const SideSpec &) = default;
};

/// Far-field kernel of an operator: sign * D_row D_col g.
struct OperatorSpec {
  SideSpec row, col;
  double sign;
};

inline constexpr OperatorSpec operator_spec(KernelKind k) {
  switch (k) {
  case KernelKind::slp:
    return {{Space::P0, Trace::value}, {Space::P0, Trace::value}, 1.0};
  case KernelKind::dlp_y:
    return {{Space::P0, Trace::value}, {Space::P1, Trace::normal}, 1.0};
  case KernelKind::dlp_x:
    return {{Space::P1, Trace::normal}, {Space::P0, Trace::value}, 1.0};
  case KernelKind::hyp:
    return {{Space::P1, Trace::normal}, {Space::P1, Trace::normal}, -1.0};
  }
  return {{Space::P0, Trace::value}, {Space::P0, Trace::value}, 1.0};
}

inline int dof_count(const SurfaceMesh &mesh, Space s) {
  return s == Space::P0 ? mesh.triangle_count() : mesh.vertex_count();
}

/// Box containing the support of a basis function.
inline BoundingBox support_box(const SurfaceMesh &mesh, Space s, int dof) {
  BoundingBox box;
  auto add_triangle = [&](int t) {
    for (int k = 0; k < 3; ++k) box.include(mesh.corner(t, k));
  };
  if (s == Space::P0) {
    add_triangle(dof);
  } else {
    for (auto *it = mesh.star_begin(dof); it != mesh.star_end(dof); ++it)
      add_triangle(it->triangle);
  }
  return box;
}

/// Surface-curl of the barycentric coordinate of corner k on triangle t,
/// n x grad(lambda_k).
inline Point3 surface_curl(const SurfaceMesh &mesh, int t, int k) {
  const Point3 &p1 = mesh.corner(t, (k + 1) % 3);
  const Point3 &p2 = mesh.corner(t, (k + 2) % 3);
  return (p1 - p2) / (2.0 * mesh.area(t));
}

class GalerkinAssembler {
public:
  GalerkinAssembler(const SurfaceMesh &mesh, int q_near)
      : mesh_(&mesh), q_(q_near) {
    if (q_near < 1) throw std::invalid_argument("q_near must be >= 1");
    for (auto c : {PairCase::identical, PairCase::shared_edge,
                   PairCase::shared_vertex, PairCase::disjoint})
      rules_[static_cast<int>(c)] = &cached_pair_rule(c, q_near);
    curls_.resize(3 * mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t)
      for (int k = 0; k < 3; ++k) curls_[3 * t + k] = surface_curl(mesh, t, k);
  }

  [[nodiscard]] const SurfaceMesh &mesh() const { return *mesh_; }
  [[nodiscard]] int q_near() const { return q_; }
  [[nodiscard]] const Point3 &curl(int t, int k) const {
    return curls_[3 * t + k];
  }

  /// Integral of g over panel a x panel b.
  [[nodiscard]] double slp_pair(int a, int b) const {
    if (a > b) std::swap(a, b); // same rule orientation for (a,b) and (b,a)
    const PanelPairing pp = pair_panels(mesh_->triangle(a), mesh_->triangle(b));
    const auto [A0, A1, A2] = corners(a, pp.order_a);
    const auto [B0, B1, B2] = corners(b, pp.order_b);
    const Point3 da = A1 - A0, ea = A2 - A0, db = B1 - B0, eb = B2 - B0;
    double sum = 0.0;
    for (const auto &p : rule(pp.kind).points) {
      const Point3 x = A0 + p.ux * da + p.vx * ea;
      const Point3 y = B0 + p.uy * db + p.vy * eb;
      sum += p.w / (x - y).norm();
    }
    const double v = sum * inv_4pi * 4.0 * mesh_->area(a) * mesh_->area(b);
    check(v, a, b);
    return v;
  }

  /// Integrals of dg/dn_y times the barycentric coordinates of panel b,
  /// indexed by b's original corners.
  [[nodiscard]] std::array<double, 3> dlp_pair(int a, int b) const {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    const PanelPairing pp = pair_panels(mesh_->triangle(a), mesh_->triangle(b));
    if (pp.kind == PairCase::identical) return out; // flat panel: <x-y,n>=0
    const auto [A0, A1, A2] = corners(a, pp.order_a);
    const auto [B0, B1, B2] = corners(b, pp.order_b);
    const Point3 da = A1 - A0, ea = A2 - A0, db = B1 - B0, eb = B2 - B0;
    const Point3 &n = mesh_->normal(b);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (const auto &p : rule(pp.kind).points) {
      const Point3 d = (A0 + p.ux * da + p.vx * ea) - (B0 + p.uy * db + p.vy * eb);
      const double r2 = d.squaredNorm();
      const double f = p.w * d.dot(n) / (r2 * std::sqrt(r2));
      s0 += f * (1.0 - p.uy - p.vy);
      s1 += f * p.uy;
      s2 += f * p.vy;
    }
    const double scale = inv_4pi * 4.0 * mesh_->area(a) * mesh_->area(b);
    out[pp.order_b[0]] = s0 * scale;
    out[pp.order_b[1]] = s1 * scale;
    out[pp.order_b[2]] = s2 * scale;
    for (double v : out) check(v, a, b);
    return out;
  }

  /// Galerkin block for natural dof index lists.  With `require_disjoint`,
  /// throws if any contributing panel pair touches.
  [[nodiscard]] Eigen::MatrixXd block(KernelKind kind, std::span<const int> rows,
                                      std::span<const int> cols,
                                      bool require_disjoint = false) const {
    const OperatorSpec spec = operator_spec(kind);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows.size(), cols.size());
    const auto rg = gather(spec.row.space, rows);
    const auto cg = gather(spec.col.space, cols);
    for (std::size_t ga = 0; ga + 1 < rg.offsets.size(); ++ga) {
      const int a = rg.triangles[ga];
      for (std::size_t gb = 0; gb + 1 < cg.offsets.size(); ++gb) {
        const int b = cg.triangles[gb];
        if (require_disjoint &&
            classify_panel_pair(mesh_->triangle(a), mesh_->triangle(b)) !=
                PairCase::disjoint)
          throw std::logic_error("coupling entry needs non-disjoint panels " +
                                 std::to_string(a) + "," + std::to_string(b));
        switch (kind) {
        case KernelKind::slp: {
          const double v = slp_pair(a, b);
          for (int r = rg.offsets[ga]; r < rg.offsets[ga + 1]; ++r)
            for (int c = cg.offsets[gb]; c < cg.offsets[gb + 1]; ++c)
              out(rg.refs[r].pos, cg.refs[c].pos) += v;
          break;
        }
        case KernelKind::hyp: {
          const double v = slp_pair(a, b);
          for (int r = rg.offsets[ga]; r < rg.offsets[ga + 1]; ++r)
            for (int c = cg.offsets[gb]; c < cg.offsets[gb + 1]; ++c)
              out(rg.refs[r].pos, cg.refs[c].pos) +=
                  v * curl(a, rg.refs[r].corner).dot(curl(b, cg.refs[c].corner));
          break;
        }
        case KernelKind::dlp_y: {
          const auto v = dlp_pair(a, b);
          for (int r = rg.offsets[ga]; r < rg.offsets[ga + 1]; ++r)
            for (int c = cg.offsets[gb]; c < cg.offsets[gb + 1]; ++c)
              out(rg.refs[r].pos, cg.refs[c].pos) += v[cg.refs[c].corner];
          break;
        }
        case KernelKind::dlp_x: {
          const auto v = dlp_pair(b, a);
          for (int r = rg.offsets[ga]; r < rg.offsets[ga + 1]; ++r)
            for (int c = cg.offsets[gb]; c < cg.offsets[gb + 1]; ++c)
              out(rg.refs[r].pos, cg.refs[c].pos) += v[rg.refs[r].corner];
          break;
        }
        }
      }
    }
    return out;
  }

  [[nodiscard]] double entry(int i, int j, KernelKind kind) const {
    return block(kind, std::span<const int>(&i, 1), std::span<const int>(&j, 1))(0, 0);
  }

private:
  struct Ref {
    int pos;
    int corner; // -1 for P0
  };
  /// Contributions grouped by triangle: refs[offsets[g]..offsets[g+1]) all
  /// live on triangles[g].
  struct Gathered {
    std::vector<int> triangles;
    std::vector<int> offsets;
    std::vector<Ref> refs;
  };

  [[nodiscard]] Gathered gather(Space s, std::span<const int> dofs) const {
    std::vector<std::pair<int, Ref>> items;
    for (std::size_t p = 0; p < dofs.size(); ++p) {
      if (s == Space::P0) {
        items.push_back({dofs[p], {static_cast<int>(p), -1}});
      } else {
        for (auto *it = mesh_->star_begin(dofs[p]); it != mesh_->star_end(dofs[p]); ++it)
          items.push_back({it->triangle, {static_cast<int>(p), it->corner}});
      }
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto &l, const auto &r) { return l.first < r.first; });
    Gathered g;
    g.refs.reserve(items.size());
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (k == 0 || items[k].first != items[k - 1].first) {
        g.triangles.push_back(items[k].first);
        g.offsets.push_back(static_cast<int>(k));
      }
      g.refs.push_back(items[k].second);
    }
    g.offsets.push_back(static_cast<int>(items.size()));
    return g;
  }

  [[nodiscard]] std::array<Point3, 3> corners(int t, const std::array<int, 3> &order) const {
    return {mesh_->corner(t, order[0]), mesh_->corner(t, order[1]),
            mesh_->corner(t, order[2])};
  }

  [[nodiscard]] const PanelPairRule &rule(PairCase c) const {
    return *rules_[static_cast<int>(c)];
  }

  static void check(double v, int a, int b) {
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite quadrature result on panel pair (" +
                               std::to_string(a) + "," + std::to_string(b) + ")");
  }

  const SurfaceMesh *mesh_;
  int q_;
  std::array<const PanelPairRule *, 4> rules_{};
  std::vector<Point3> curls_;
};

/// Regular quadrature points on every panel, for single surface integrals.
class SurfaceQuadrature {
public:
  SurfaceQuadrature(const SurfaceMesh &mesh, int q) : mesh_(&mesh), q_(q) {
    const auto ref = triangle_rule(q);
    npt_ = static_cast<int>(ref.size());
    lambda_.resize(3 * npt_);
    for (int p = 0; p < npt_; ++p) {
      lambda_[3 * p + 0] = 1.0 - ref[p].u - ref[p].v;
      lambda_[3 * p + 1] = ref[p].u;
      lambda_[3 * p + 2] = ref[p].v;
    }
    points_.resize(static_cast<std::size_t>(npt_) * mesh.triangle_count());
    weights_.resize(points_.size());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const Point3 &p0 = mesh.corner(t, 0);
      const Point3 d = mesh.corner(t, 1) - p0, e = mesh.corner(t, 2) - p0;
      for (int p = 0; p < npt_; ++p) {
        points_[t * npt_ + p] = p0 + ref[p].u * d + ref[p].v * e;
        weights_[t * npt_ + p] = 2.0 * mesh.area(t) * ref[p].w;
      }
    }
  }

  [[nodiscard]] const SurfaceMesh &mesh() const { return *mesh_; }
  [[nodiscard]] int order() const { return q_; }
  [[nodiscard]] int points_per_triangle() const { return npt_; }
  [[nodiscard]] const Point3 &point(int t, int p) const {
    return points_[t * npt_ + p];
  }
  [[nodiscard]] double weight(int t, int p) const { return weights_[t * npt_ + p]; }
  [[nodiscard]] double lambda(int p, int corner) const {
    return lambda_[3 * p + corner];
  }

private:
  const SurfaceMesh *mesh_;
  int q_;
  int npt_ = 0;
  std::vector<Point3> points_;
  std::vector<double> weights_;
  std::vector<double> lambda_;
};

/// Kernel variants of a single surface integral  int b(x) k(x, z) dx  over a
/// basis function b with an evaluation point z off its support.
enum class PotentialKind {
  value,                      ///< g(x,z)
  normal_derivative_at_point, ///< dg/dn_z(x,z)
  normal_derivative_on_panel, ///< dg/dn_x(x,z)
  double_normal_derivative,   ///< d/dn_x d/dn_z g(x,z)
};

inline PotentialKind potential_kind(Trace panel_side, bool point_derivative) {
  if (panel_side == Trace::value)
    return point_derivative ? PotentialKind::normal_derivative_at_point
                            : PotentialKind::value;
  return point_derivative ? PotentialKind::double_normal_derivative
                          : PotentialKind::normal_derivative_on_panel;
}

namespace detail {
inline double potential_kernel(PotentialKind kind, const Point3 &x,
                               const Point3 &nx, const Point3 &z,
                               const Point3 &nz) {
  const Point3 d = x - z;
  const double r2 = d.squaredNorm();
  const double r = std::sqrt(r2);
  switch (kind) {
  case PotentialKind::value: return inv_4pi / r;
  case PotentialKind::normal_derivative_at_point:
    return inv_4pi * d.dot(nz) / (r2 * r);
  case PotentialKind::normal_derivative_on_panel:
    return -inv_4pi * d.dot(nx) / (r2 * r);
  case PotentialKind::double_normal_derivative:
    return inv_4pi * (nx.dot(nz) / (r2 * r) - 3.0 * d.dot(nx) * d.dot(nz) / (r2 * r2 * r));
  }
  return 0.0;
}

inline void require_outside(const BoundingBox &support, const Point3 &z,
                            int dof) {
  if (!(support.distance(z) > 0.0))
    throw std::domain_error("potential evaluation point touches the support of dof " +
                            std::to_string(dof));
}
} // namespace detail

/// Matrix of single integrals: entry (r, c) = scale[c] * int b_{dofs[r]}(x)
/// k(x, points[c]) dx.  `normals` is required for the point-derivative kinds.
inline Eigen::MatrixXd potential_matrix(const SurfaceQuadrature &quad, Space space,
                                        PotentialKind kind,
                                        std::span<const int> dofs,
                                        std::span<const Point3> points,
                                        std::span<const Point3> normals = {},
                                        std::span<const double> scale = {}) {
  const SurfaceMesh &mesh = quad.mesh();
  const bool needs_nz = kind == PotentialKind::normal_derivative_at_point ||
                        kind == PotentialKind::double_normal_derivative;
  if (needs_nz && normals.size() != points.size())
    throw std::invalid_argument("potential_matrix: missing point normals");
  const Point3 zero = Point3::Zero();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dofs.size(), points.size());
  const int npt = quad.points_per_triangle();
  for (std::size_t r = 0; r < dofs.size(); ++r) {
    const int dof = dofs[r];
    const BoundingBox support = support_box(mesh, space, dof);
    for (std::size_t c = 0; c < points.size(); ++c)
      detail::require_outside(support, points[c], dof);
    auto accumulate = [&](int t, int corner) {
      const Point3 &nx = mesh.normal(t);
      for (int p = 0; p < npt; ++p) {
        const double w =
            quad.weight(t, p) * (corner < 0 ? 1.0 : quad.lambda(p, corner));
        const Point3 &x = quad.point(t, p);
        for (std::size_t c = 0; c < points.size(); ++c)
          out(r, c) += w * detail::potential_kernel(kind, x, nx, points[c],
                                                    needs_nz ? normals[c] : zero);
      }
    };
    if (space == Space::P0)
      accumulate(dof, -1);
    else
      for (auto *it = mesh.star_begin(dof); it != mesh.star_end(dof); ++it)
        accumulate(it->triangle, it->corner);
  }
  if (!scale.empty())
    for (std::size_t c = 0; c < points.size(); ++c) out.col(c) *= scale[c];
  return out;
}

inline double potential_integral(const SurfaceQuadrature &quad, Space space,
                                 int dof, const Point3 &z, PotentialKind kind,
                                 const Point3 &nz = Point3::Zero()) {
  return potential_matrix(quad, space, kind, std::span<const int>(&dof, 1),
                          std::span<const Point3>(&z, 1),
                          std::span<const Point3>(&nz, 1))(0, 0);
}

} // namespace fastbem
