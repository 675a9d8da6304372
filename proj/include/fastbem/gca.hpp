#pragma once

// Green cross approximation: Green's representation formula on an auxiliary
// box around each cluster is discretized by quadrature, and cross
// approximation picks pivot rows t-hat and an interpolation-like basis V_t.
// Parents reuse their children's pivots, which gives nested bases.

#include "h2matrix.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastbem {

/// Quadrature on the surface of an axis-parallel box.
struct GreenBox {
  BoundingBox box;
  std::vector<Point3> points;
  std::vector<Point3> normals; ///< outward
  std::vector<double> weights;

  [[nodiscard]] int size() const { return static_cast<int>(points.size()); }
};

/// B_t inflated by its longest edge on every side.
inline BoundingBox green_box(const BoundingBox &bt) {
  const BoundingBox b = bt.nondegenerate();
  const double delta = b.longest_edge();
  const Point3 d = Point3::Constant(delta);
  return {b.a - d, b.b + d};
}

/// One m x m Gauss patch per face: 6 m^2 points.
inline GreenBox green_quadrature(const BoundingBox &omega, int m) {
  if (m < 1) throw std::invalid_argument("Green quadrature order must be >= 1");
  const QuadRule1D g = gauss_legendre(m);
  GreenBox gb;
  gb.box = omega;
  const Point3 ext = omega.extent();
  for (int ax = 0; ax < 3; ++ax) {
    const int b = (ax + 1) % 3, c = (ax + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      Point3 n = Point3::Zero();
      n[ax] = side ? 1.0 : -1.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          Point3 z;
          z[ax] = side ? omega.b[ax] : omega.a[ax];
          z[b] = omega.a[b] + g.points[i] * ext[b];
          z[c] = omega.a[c] + g.points[j] * ext[c];
          gb.points.push_back(z);
          gb.normals.push_back(n);
          gb.weights.push_back(g.weights[i] * g.weights[j] * ext[b] * ext[c]);
        }
    }
  }
  return gb;
}

/// Green-quadrature approximation of g(x, y) for x inside and y outside the
/// box: sum_nu w_nu (g(x,z) dg/dn_z(z,y) - dg/dn_z(x,z) g(z,y)).
inline double green_kernel(const GreenBox &gb, const Point3 &x, const Point3 &y) {
  double v = 0.0;
  for (int nu = 0; nu < gb.size(); ++nu) {
    const Point3 &z = gb.points[nu], &n = gb.normals[nu];
    v += gb.weights[nu] * (laplace_kernel(x, z) * kernel_dn(z, y, n, Side::x) -
                           kernel_dn(x, z, n, Side::y) * laplace_kernel(z, y));
  }
  return v;
}

/// L = [A | C] with a_{i nu} = sqrt(w) int b_i D g(x, z_nu) and
/// c_{i nu} = sqrt(w) int b_i D dg/dn_z(x, z_nu), D the side's trace.
inline Matrix green_matrix(const SurfaceQuadrature &quad, const SideSpec &side,
                           std::span<const int> dofs, const GreenBox &gb) {
  std::vector<double> sw(gb.size());
  for (int nu = 0; nu < gb.size(); ++nu) sw[nu] = std::sqrt(gb.weights[nu]);
  Matrix L(dofs.size(), 2 * gb.size());
  L.leftCols(gb.size()) = potential_matrix(quad, side.space, potential_kind(side.trace, false),
                                           dofs, gb.points, gb.normals, sw);
  L.rightCols(gb.size()) = potential_matrix(quad, side.space, potential_kind(side.trace, true),
                                            dofs, gb.points, gb.normals, sw);
  return L;
}

struct GcaOptions {
  int order = 3;
  double eps_aca = 1e-5;
};

/// Pivot selection on L and the basis L(:, sigma) L(tau, sigma)^{-1}.
struct GcaStep {
  std::vector<int> tau;  ///< pivot rows, local to the row set
  Matrix V;              ///< rows x |tau|, identity on tau
  int row_count = 0;     ///< rows of L that were touched
  bool rank_deficient = false;
};

inline GcaStep gca_step(const SurfaceQuadrature &quad, const SideSpec &side,
                        std::span<const int> dofs, const BoundingBox &cluster_box,
                        const GcaOptions &opt) {
  const GreenBox gb = green_quadrature(green_box(cluster_box), opt.order);
  const Matrix L = green_matrix(quad, side, dofs, gb);
  const CrossCore core = aca_inverse_core(L, opt.eps_aca);
  GcaStep s;
  s.tau = core.row_pivots;
  s.row_count = static_cast<int>(L.rows());
  s.rank_deficient = core.rank_deficient;
  Matrix Ls(L.rows(), core.col_pivots.size());
  for (std::size_t q = 0; q < core.col_pivots.size(); ++q) Ls.col(q) = L.col(core.col_pivots[q]);
  s.V = Ls * core.C;
  return s;
}

/// Leaf construction: t-hat (natural indices) and V_t.
inline GcaStep gca_leaf(const SurfaceQuadrature &quad, const SideSpec &side,
                        const ClusterTree &tree, int t, const GcaOptions &opt) {
  return gca_step(quad, side, tree.dofs(t), tree[t].box, opt);
}

/// Nested construction on the children's pivots t-hat_1 u t-hat_2 with the
/// parent's Green box.  V-hat is split row-wise into the transfer matrices.
struct GcaNested {
  std::vector<int> pivots;          ///< natural indices, subset of the children's
  std::array<Matrix, 2> transfer;   ///< E_t1, E_t2
  int row_count = 0;
  bool rank_deficient = false;
};

inline GcaNested gca_nested(const SurfaceQuadrature &quad, const SideSpec &side,
                            const BoundingBox &parent_box,
                            const std::vector<int> &child1_pivots,
                            const std::vector<int> &child2_pivots,
                            const GcaOptions &opt) {
  std::vector<int> rows(child1_pivots);
  rows.insert(rows.end(), child2_pivots.begin(), child2_pivots.end());
  const GcaStep s = gca_step(quad, side, rows, parent_box, opt);
  GcaNested out;
  for (int r : s.tau) out.pivots.push_back(rows[r]);
  const auto k1 = static_cast<Eigen::Index>(child1_pivots.size());
  out.transfer[0] = s.V.topRows(k1);
  out.transfer[1] = s.V.bottomRows(s.V.rows() - k1);
  out.row_count = s.row_count;
  out.rank_deficient = s.rank_deficient;
  return out;
}

/// Bottom-up, level by level; all clusters of one level in parallel.
inline std::shared_ptr<ClusterBasis>
build_gca_basis(std::shared_ptr<const ClusterTree> tree, const SurfaceQuadrature &quad,
                const SideSpec &side, const GcaOptions &opt) {
  auto basis = std::make_shared<ClusterBasis>(tree);
  const auto &levels = tree->levels();
  for (int l = static_cast<int>(levels.size()) - 1; l >= 0; --l) {
    parallel_for(static_cast<long>(levels[l].size()), [&](long k) {
      const int t = levels[l][k];
      const Cluster &c = (*tree)[t];
      if (c.is_leaf()) {
        GcaStep s = gca_leaf(quad, side, *tree, t, opt);
        const auto d = tree->dofs(t);
        for (int r : s.tau) basis->pivots(t).push_back(d[r]);
        basis->leaf_matrix(t) = std::move(s.V);
      } else {
        GcaNested s = gca_nested(quad, side, c.box, basis->pivots(c.children[0]),
                                 basis->pivots(c.children[1]), opt);
        basis->pivots(t) = std::move(s.pivots);
        basis->transfer(c.children[0]) = std::move(s.transfer[0]);
        basis->transfer(c.children[1]) = std::move(s.transfer[1]);
      }
    });
  }
  return basis;
}

/// Coupling matrices S_ts = G|_{t-hat x s-hat} by regular Galerkin quadrature;
/// near-field leaves dense.
inline H2Matrix assemble_h2(KernelKind kind, const GalerkinAssembler &assembler,
                            std::shared_ptr<const ClusterBasis> row_basis,
                            std::shared_ptr<const ClusterBasis> col_basis,
                            std::shared_ptr<const BlockTree> blocks,
                            bool with_nearfield = true) {
  H2Matrix h(row_basis, col_basis, blocks);
  const auto &far = blocks->farfield();
  parallel_for(static_cast<long>(far.size()), [&](long k) {
    const Block &b = (*blocks)[far[k]];
    try {
      h.coupling(k) = assembler.block(kind, row_basis->pivots(b.row),
                                      col_basis->pivots(b.col), true);
    } catch (const std::exception &e) {
      throw std::runtime_error("GCA coupling block (" + std::to_string(b.row) + "," +
                               std::to_string(b.col) + "): " + e.what());
    }
  });
  if (with_nearfield) assemble_nearfield(h, assembler, kind);
  return h;
}

/// Ranks |t-hat| over all clusters, or over the active ones if a mask is given.
inline RankStats basis_rank_stats(const ClusterBasis &basis,
                                  const std::vector<char> *active = nullptr) {
  RankStats s;
  double sum = 0.0;
  for (int t = 0; t < basis.tree().size(); ++t) {
    if (active && !(*active)[t]) continue;
    s.max_rank = std::max(s.max_rank, basis.rank(t));
    sum += basis.rank(t);
    ++s.blocks;
  }
  s.mean_rank = s.blocks ? sum / s.blocks : 0.0;
  return s;
}

} // namespace fastbem
