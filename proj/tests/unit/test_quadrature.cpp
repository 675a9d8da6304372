#include <fastbem/galerkin.hpp>
#include <fastbem/mesh.hpp>
#include <fastbem/quadrature.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace fastbem;

TEST(GaussLegendre, LowOrders) {
  const auto g1 = gauss_legendre(1);
  ASSERT_EQ(g1.points.size(), 1u);
  EXPECT_DOUBLE_EQ(g1.points[0], 0.5);
  EXPECT_DOUBLE_EQ(g1.weights[0], 1.0);
  const auto g2 = gauss_legendre(2);
  EXPECT_NEAR(g2.points[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(g2.points[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-15);
  double cubic = 0.0;
  for (int i = 0; i < 2; ++i) cubic += g2.weights[i] * std::pow(g2.points[i], 3);
  EXPECT_NEAR(cubic, 0.25, 1e-15);
  EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(GaussLegendre, ExactnessAndWeights) {
  for (int q = 1; q <= 12; ++q) {
    const auto g = gauss_legendre(q);
    EXPECT_NEAR(std::accumulate(g.weights.begin(), g.weights.end(), 0.0), 1.0, 1e-14);
    for (double x : g.points) {
      EXPECT_GT(x, 0.0);
      EXPECT_LT(x, 1.0);
    }
    for (int d = 0; d <= 2 * q - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < q; ++i) s += g.weights[i] * std::pow(g.points[i], d);
      EXPECT_NEAR(s, 1.0 / (d + 1), 1e-14) << "q=" << q << " d=" << d;
    }
  }
}

TEST(TriangleRule, Basics) {
  const auto r1 = triangle_rule(1);
  ASSERT_EQ(r1.size(), 1u);
  EXPECT_DOUBLE_EQ(r1[0].w, 0.5);
  for (int q = 1; q <= 12; ++q) {
    const auto r = triangle_rule(q);
    EXPECT_EQ(r.size(), static_cast<std::size_t>(q * q));
    double s = 0.0, sx = 0.0;
    for (const auto &p : r) {
      EXPECT_GT(p.w, 0.0);
      s += p.w;
      sx += p.w * p.u;
    }
    EXPECT_NEAR(s, 0.5, 1e-14);
    if (q >= 2) {
      EXPECT_NEAR(sx, 1.0 / 6.0, 1e-14);
    }
  }
}

TEST(PanelPairs, Classification) {
  const SurfaceMesh o = build_octahedron();
  EXPECT_EQ(classify_panel_pair(o.triangle(0), o.triangle(0)), PairCase::identical);
  int edge = 0, vertex = 0, disjoint = 0;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      if (a == b) continue;
      switch (classify_panel_pair(o.triangle(a), o.triangle(b))) {
      case PairCase::shared_edge: ++edge; break;
      case PairCase::shared_vertex: ++vertex; break;
      case PairCase::disjoint: ++disjoint; break;
      default: ADD_FAILURE();
      }
    }
  // each face: 3 edge neighbours, 3 vertex neighbours, 1 opposite face
  EXPECT_EQ(edge, 24);
  EXPECT_EQ(vertex, 24);
  EXPECT_EQ(disjoint, 8);
}

TEST(PanelPairs, RuleSizesAndWeights) {
  for (auto c : {PairCase::identical, PairCase::shared_edge, PairCase::shared_vertex,
                 PairCase::disjoint})
    for (int q : {3, 5}) {
      const auto r = sauter_schwab_rule(c, q);
      EXPECT_EQ(r.points.size(), static_cast<std::size_t>(subdomain_count(c) * q * q * q * q));
      double s = 0.0;
      for (const auto &p : r.points) {
        EXPECT_TRUE(std::isfinite(p.w));
        EXPECT_GT(p.w, 0.0);
        s += p.w;
      }
      EXPECT_NEAR(s, 0.25, 1e-13); // area of the reference pair
    }
}

namespace {
// Single-layer entry of two P0 panels given by explicit triangles.
double slp_entry(const SurfaceMesh &m, int a, int b, int q) {
  return GalerkinAssembler(m, q).slp_pair(a, b);
}

SurfaceMesh unit_right_pair() {
  // two triangles sharing the edge (0,0,0)-(1,0,0), folded at 90 degrees,
  // plus a far one and one sharing only the origin
  return SurfaceMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 0}, {0, -1, 0},
                      {10, 10, 10}, {11, 10, 10}, {10, 11, 10}},
                     {{0, 1, 2}, {1, 0, 3}, {0, 4, 5}, {6, 7, 8}});
}
} // namespace

TEST(SauterSchwab, IdenticalPanelSelfConvergence) {
  const SurfaceMesh m = unit_right_pair();
  const double ref = slp_entry(m, 0, 0, 12);
  EXPECT_NEAR(slp_entry(m, 0, 0, 6), ref, 1e-6);
}

TEST(SauterSchwab, DisjointFarPanels) {
  const SurfaceMesh m = unit_right_pair();
  EXPECT_NEAR(slp_entry(m, 0, 3, 4), slp_entry(m, 0, 3, 10), 1e-10);
}

TEST(SauterSchwab, SharedEdgeSymmetry) {
  const SurfaceMesh m = unit_right_pair();
  ASSERT_EQ(classify_panel_pair(m.triangle(0), m.triangle(1)), PairCase::shared_edge);
  EXPECT_NEAR(slp_entry(m, 0, 1, 5), slp_entry(m, 1, 0, 5), 1e-13);
  ASSERT_EQ(classify_panel_pair(m.triangle(0), m.triangle(2)), PairCase::shared_vertex);
  EXPECT_NEAR(slp_entry(m, 0, 2, 5), slp_entry(m, 2, 0, 5), 1e-13);
}

TEST(SauterSchwab, GeometricCauchySequences) {
  const SurfaceMesh m = unit_right_pair();
  for (auto [a, b] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{0, 2}}) {
    std::vector<double> v;
    for (int q = 2; q <= 12; ++q) v.push_back(slp_entry(m, a, b, q));
    const double ref = v.back();
    // errors against the finest value decay geometrically
    double prev = std::abs(v[0] - ref);
    int decreasing = 0;
    for (std::size_t k = 1; k + 3 < v.size(); ++k) {
      const double e = std::abs(v[k] - ref);
      if (e < 0.9 * prev || e < 1e-13) ++decreasing;
      prev = e;
    }
    EXPECT_EQ(decreasing, static_cast<int>(v.size()) - 4) << a << "," << b;
    EXPECT_LT(std::abs(v[v.size() - 2] - ref), 1e-9);
  }
}

TEST(SauterSchwab, DisjointMatchesTensorGauss) {
  const SurfaceMesh m = unit_right_pair();
  const int q = 3;
  const auto tr = triangle_rule(q);
  double s = 0.0;
  const Point3 a0 = m.corner(0, 0), da = m.corner(0, 1) - a0, ea = m.corner(0, 2) - a0;
  const Point3 b0 = m.corner(3, 0), db = m.corner(3, 1) - b0, eb = m.corner(3, 2) - b0;
  for (const auto &p : tr)
    for (const auto &r : tr)
      s += p.w * r.w * laplace_kernel(a0 + p.u * da + p.v * ea, b0 + r.u * db + r.v * eb);
  s *= 4.0 * m.area(0) * m.area(3);
  EXPECT_NEAR(slp_entry(m, 0, 3, q), s, 1e-15 * std::abs(s) + 1e-18);
}

TEST(SauterSchwab, NearfieldFiniteOnSpheres) {
  for (int l = 0; l <= 2; ++l) {
    const SurfaceMesh m = sphere_mesh(l);
    const GalerkinAssembler g(m, 3);
    std::vector<int> all(m.triangle_count());
    std::iota(all.begin(), all.end(), 0);
    EXPECT_TRUE(g.block(KernelKind::slp, all, all).allFinite());
  }
}
