#include <fastbem/gca.hpp>
#include <fastbem/mesh.hpp>
#include <fastbem/study.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace fastbem;

TEST(GreenBox, InflationRule) {
  const BoundingBox w = green_box({Point3::Zero(), Point3::Ones()});
  EXPECT_EQ(w.a, Point3::Constant(-1));
  EXPECT_EQ(w.b, Point3::Constant(2));
  const BoundingBox w2 = green_box({Point3::Zero(), Point3(2, 1, 1)});
  EXPECT_EQ(w2.a, Point3::Constant(-2));
  EXPECT_EQ(w2.b, Point3(4, 3, 3));
  // distance from B_t to every face is the longest edge
  const BoundingBox bt{Point3(0.5, -1, 2), Point3(1.0, 0.5, 2.25)};
  const BoundingBox g = green_box(bt);
  for (int ax = 0; ax < 3; ++ax) {
    EXPECT_DOUBLE_EQ(bt.a[ax] - g.a[ax], 1.5);
    EXPECT_DOUBLE_EQ(g.b[ax] - bt.b[ax], 1.5);
  }
}

TEST(GreenQuadrature, WeightsAndDivergenceTheorem) {
  const BoundingBox w{Point3(-1, 0, 2), Point3(2, 0.5, 4)};
  const GreenBox g2 = green_quadrature(w, 2);
  EXPECT_EQ(g2.size(), 24);
  for (int m = 1; m <= 5; ++m) {
    const GreenBox g = green_quadrature(w, m);
    double area = 0.0, flux = 0.0;
    for (int nu = 0; nu < g.size(); ++nu) {
      EXPECT_GT(g.weights[nu], 0.0);
      area += g.weights[nu];
      flux += g.weights[nu] * g.points[nu][0] * g.normals[nu][0];
      // outward: moving along the normal leaves the box
      EXPECT_FALSE(w.contains(Point3(g.points[nu] + 1e-9 * g.normals[nu])));
    }
    const Point3 e = w.extent();
    EXPECT_NEAR(area, 2 * (e[0] * e[1] + e[1] * e[2] + e[0] * e[2]), 1e-12);
    EXPECT_NEAR(flux, e[0] * e[1] * e[2], 1e-12);
  }
  EXPECT_THROW(green_quadrature(w, 0), std::invalid_argument);
}

TEST(GreenQuadrature, RepresentationConvergesGeometrically) {
  const BoundingBox bt{Point3::Zero(), Point3::Ones()};
  const BoundingBox bs{Point3(3, 0, 0), Point3(4, 1, 1)};
  std::vector<double> err;
  for (int m = 2; m <= 6; ++m) {
    const GreenBox g = green_quadrature(green_box(bt), m);
    double e = 0.0;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 6; ++c) {
          const Point3 s((a + 0.5) / 6, (b + 0.5) / 6, (c + 0.5) / 6);
          const Point3 x = s, y = bs.a + s;
          e = std::max(e, std::abs(green_kernel(g, x, y) - laplace_kernel(x, y)));
        }
    err.push_back(e);
  }
  for (std::size_t k = 1; k < err.size(); ++k) EXPECT_LT(err[k] / err[k - 1], 0.85) << k;
}

namespace {
struct GcaFixture {
  SurfaceMesh mesh = sphere_mesh(2);
  Parameters params = [] {
    Parameters p;
    p.leaf_size = 8;
    p.order = 3;
    p.eps_aca = 1e-5;
    return p;
  }();
  Geometry geo{mesh, params};
  const SideSpec p0{Space::P0, Trace::value};
  std::shared_ptr<ClusterBasis> basis =
      build_gca_basis(geo.tree[0], *geo.quad, p0, {params.order, params.eps_aca});
};
} // namespace

TEST(GcaLeaf, IdentityOnPivotsAndRankBound) {
  GcaFixture s;
  const ClusterTree &t = *s.geo.tree[0];
  int below = 0;
  for (int leaf : t.leaves()) {
    const GcaStep st = gca_leaf(*s.geo.quad, s.p0, t, leaf, {3, 1e-5});
    ASSERT_LE(st.tau.size(), 2u * 6 * 9);
    for (std::size_t a = 0; a < st.tau.size(); ++a)
      for (std::size_t b = 0; b < st.tau.size(); ++b)
        EXPECT_NEAR(st.V(st.tau[a], b), a == b ? 1.0 : 0.0, 1e-10);
    below += static_cast<int>(st.tau.size()) < 2 * 6 * 9;
  }
  EXPECT_EQ(below, static_cast<int>(t.leaves().size()));
}

TEST(GcaLeaf, OneSidedErrorOnAdmissibleBlocks) {
  GcaFixture s;
  const ClusterTree &t = *s.geo.tree[0];
  const BlockTree &bt = *s.geo.block_tree(KernelKind::slp);
  int checked = 0;
  for (int id : bt.farfield()) {
    const Block &b = bt[id];
    if (!t[b.row].is_leaf()) continue;
    const GcaStep st = gca_leaf(*s.geo.quad, s.p0, t, b.row, {3, 1e-5});
    const auto rows = t.dofs(b.row);
    const Matrix G = s.geo.assembler->block(KernelKind::slp, rows, t.dofs(b.col));
    Matrix Gp(st.tau.size(), G.cols());
    for (std::size_t a = 0; a < st.tau.size(); ++a) Gp.row(a) = G.row(st.tau[a]);
    EXPECT_LE((G - st.V * Gp).norm(), 10 * 1e-5 * G.norm());
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(GcaNested, PivotsNestedAndIdentityThroughTransfers) {
  GcaFixture s;
  const ClusterTree &t = *s.geo.tree[0];
  for (int c = 0; c < t.size(); ++c) {
    if (t[c].is_leaf()) continue;
    const auto &p1 = s.basis->pivots(t[c].children[0]);
    const auto &p2 = s.basis->pivots(t[c].children[1]);
    std::set<int> pool(p1.begin(), p1.end());
    pool.insert(p2.begin(), p2.end());
    for (int p : s.basis->pivots(c)) EXPECT_TRUE(pool.count(p));
    const GcaNested n = gca_nested(*s.geo.quad, s.p0, t[c].box, p1, p2, {3, 1e-5});
    EXPECT_EQ(n.row_count, static_cast<int>(p1.size() + p2.size()));
    // the expanded basis is the identity on the cluster's own pivots
    const Matrix V = s.basis->explicit_basis(c);
    const auto dofs = t.dofs(c);
    const auto &piv = s.basis->pivots(c);
    for (std::size_t a = 0; a < piv.size(); ++a) {
      const auto pos = std::find(dofs.begin(), dofs.end(), piv[a]) - dofs.begin();
      for (std::size_t b = 0; b < piv.size(); ++b)
        EXPECT_NEAR(V(pos, b), a == b ? 1.0 : 0.0, 1e-10);
    }
    // V_t restricted to a child equals V_child E_child
    for (int child : t[c].children) {
      const Matrix lhs = V.middleRows(t[child].begin - t[c].begin, t[child].size());
      const Matrix rhs = s.basis->explicit_basis(child) * s.basis->transfer(child);
      EXPECT_LE((lhs - rhs).norm(), 1e-10 * std::max(1.0, lhs.norm()));
    }
  }
}

TEST(GcaH2, OracleAgreementAndPivotRows) {
  GcaFixture s;
  OperatorBuilder b(s.geo, Method::gca);
  const AnyMatrix g = b.build(KernelKind::slp);
  const Matrix ref = assemble_dense(*s.geo.assembler, KernelKind::slp);
  const OracleRow r = compare_with_dense(g, ref, KernelKind::slp, Method::gca, 1e-3, 3);
  EXPECT_LE(r.frobenius, 1e-3);
  EXPECT_LE(r.matvec, 1e-3);
  const H2Matrix &h = std::get<H2Matrix>(g.get());
  const Matrix D = h.dense();
  const BlockTree &bt = h.block_tree();
  for (int id : bt.farfield()) {
    const Block &blk = bt[id];
    for (int i : h.row_basis().pivots(blk.row))
      for (int j : h.col_tree().dofs(blk.col))
        EXPECT_NEAR(D(i, j), ref(i, j), 1e-8 * ref.cwiseAbs().maxCoeff());
  }
}

TEST(GcaH2, RankStatistics) {
  GcaFixture s;
  const RankStats st = basis_rank_stats(*s.basis);
  EXPECT_LE(st.max_rank, 2 * 6 * 9);
  EXPECT_GT(st.mean_rank, 0.0);
}

TEST(ClusterBasisTransform, ForwardMatchesExplicitBasis) {
  GcaFixture s;
  const ClusterTree &t = *s.geo.tree[0];
  const int leaf = t.leaves()[1];
  Vector x = Vector::Zero(t.dof_count());
  for (int k = t[leaf].begin; k < t[leaf].end; ++k) x[k] = std::sin(1.0 + k);
  const auto xh = s.basis->forward(x);
  for (int c = leaf; c >= 0; c = t[c].parent) {
    const Vector direct =
        s.basis->explicit_basis(c).transpose() * x.segment(t[c].begin, t[c].size());
    EXPECT_LE((xh[c] - direct).norm(), 1e-12 * std::max(1.0, direct.norm())) << c;
  }
}
