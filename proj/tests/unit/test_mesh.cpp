#include <fastbem/mesh.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace fastbem;

TEST(Octahedron, CountsAndAreas) {
  const SurfaceMesh m = build_octahedron();
  EXPECT_EQ(m.triangle_count(), 8);
  EXPECT_EQ(m.vertex_count(), 6);
  for (int t = 0; t < 8; ++t) {
    EXPECT_NEAR(m.area(t), std::sqrt(3.0) / 2.0, 1e-15);
    EXPECT_NEAR(m.normal(t).norm(), 1.0, 1e-12);
    // outward: normal points away from the origin
    EXPECT_GT(m.normal(t).dot(m.corner(t, 0)), 0.0);
  }
  EXPECT_NO_THROW(validate(m));
}

TEST(Refinement, CountsFollowEuler) {
  const SurfaceMesh r = refine_red(build_octahedron());
  EXPECT_EQ(r.triangle_count(), 32);
  EXPECT_EQ(r.vertex_count(), 18);
  EXPECT_NO_THROW(validate(r));
  SurfaceMesh m = build_octahedron();
  for (int l = 1; l <= 4; ++l) {
    m = refine_red(m);
    EXPECT_EQ(m.triangle_count(), 8 * (1 << (2 * l)));
    // V - E + F = 2 with E = 3F/2
    EXPECT_EQ(m.vertex_count() - 3 * m.triangle_count() / 2 + m.triangle_count(), 2);
  }
  EXPECT_NO_THROW(validate(sphere_mesh(2)));
  EXPECT_EQ(sphere_mesh(2).triangle_count(), 128);
}

TEST(Refinement, PlanarWidthHalvesExactly) {
  SurfaceMesh m = build_octahedron();
  for (int k = 0; k <= 4; ++k) {
    EXPECT_DOUBLE_EQ(mesh_width(m), std::sqrt(2.0) / std::pow(2.0, k));
    m = refine_red(m);
  }
}

TEST(Projection, UnitVerticesAndMidpoint) {
  const SurfaceMesh o = build_octahedron();
  const SurfaceMesh p = project_unit_sphere(o);
  for (int v = 0; v < 6; ++v) EXPECT_EQ(p.vertex(v), o.vertex(v));
  const SurfaceMesh s = project_unit_sphere(refine_red(o));
  bool found = false;
  for (const auto &v : s.vertices()) {
    EXPECT_NEAR(v.norm(), 1.0, 1e-14);
    if (v.z() == 0.0 && v.x() > 0 && v.y() > 0) {
      EXPECT_NEAR(v.x(), std::sqrt(0.5), 1e-15);
      EXPECT_NEAR(v.y(), std::sqrt(0.5), 1e-15);
      found = true;
    }
  }
  EXPECT_TRUE(found);
  const SurfaceMesh bad({Point3::Zero(), {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  EXPECT_THROW(project_unit_sphere(bad), MeshError);
}

TEST(MeshWidth, SphereSequence) {
  EXPECT_NEAR(mesh_width(build_octahedron()), std::sqrt(2.0), 1e-15);
  EXPECT_LT(mesh_width(sphere_mesh(1)), std::sqrt(2.0));
  for (int l = 1; l < 4; ++l) {
    const double ratio = mesh_width(sphere_mesh(l)) / mesh_width(sphere_mesh(l + 1));
    EXPECT_NEAR(ratio, 2.0, 0.3) << "level " << l;
  }
}

TEST(MeshVolume, ConvergesToBall) {
  EXPECT_GT(signed_volume(build_octahedron()), 0.0);
  const double v3 = signed_volume(sphere_mesh(3));
  EXPECT_NEAR(v3, 4.0 * M_PI / 3.0, 0.03 * 4.0 * M_PI / 3.0);
  for (int l = 0; l < 4; ++l)
    EXPECT_LT(signed_volume(sphere_mesh(l)), signed_volume(sphere_mesh(l + 1)));
}

TEST(MeshIO, RoundTrip) {
  const SurfaceMesh m = sphere_mesh(2);
  std::stringstream ss;
  write_mesh(m, ss);
  const SurfaceMesh r = read_mesh(ss);
  ASSERT_EQ(r.vertex_count(), m.vertex_count());
  ASSERT_EQ(r.triangle_count(), m.triangle_count());
  for (int v = 0; v < m.vertex_count(); ++v) EXPECT_EQ(r.vertex(v), m.vertex(v));
  for (int t = 0; t < m.triangle_count(); ++t) EXPECT_EQ(r.triangle(t), m.triangle(t));
}

TEST(MeshIO, IndexOutOfRange) {
  std::stringstream ss("3 1\n0 0 0\n1 0 0\n0 1 0\n0 1 3\n");
  try {
    read_mesh(ss);
    FAIL() << "expected a parse error";
  } catch (const MeshError &e) {
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
  }
}

TEST(MeshIO, OpenSurfaceNamesEdge) {
  // octahedron with one triangle removed
  const SurfaceMesh o = build_octahedron();
  std::vector<Triangle> tris(o.triangles().begin() + 1, o.triangles().end());
  std::stringstream ss;
  write_mesh(SurfaceMesh(o.vertices(), tris), ss);
  try {
    read_mesh(ss);
    FAIL() << "expected a validation error";
  } catch (const MeshError &e) {
    EXPECT_NE(std::string(e.what()).find("open edge"), std::string::npos) << e.what();
  }
}

TEST(MeshValidation, FlippedTriangle) {
  const SurfaceMesh o = build_octahedron();
  auto tris = o.triangles();
  std::swap(tris[0][1], tris[0][2]);
  EXPECT_THROW(validate(SurfaceMesh(o.vertices(), tris)), MeshError);
}
