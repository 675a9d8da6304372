#include <fastbem/study.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace fastbem;

namespace {
LinearOperator from_matrix(const Matrix &A) {
  return {static_cast<int>(A.rows()), [&A](const Vector &x) -> Vector { return A * x; }};
}

struct DenseOps {
  SurfaceMesh mesh;
  Geometry geo;
  OperatorTriple ops;
  explicit DenseOps(int level)
      : mesh(sphere_mesh(level)), geo(mesh, Parameters{}),
        ops(build_operators(geo, Method::dense)) {}
};
} // namespace

TEST(Cg, Identity) {
  const Matrix I = Matrix::Identity(7, 7);
  const Vector b = Vector::LinSpaced(7, 1, 7);
  const CgResult r = cg(from_matrix(I), b, 1e-12, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE((r.x - b).norm(), 1e-14);
}

TEST(Cg, TwoByTwo) {
  Matrix A(2, 2);
  A << 2, 1, 1, 2;
  const CgResult r = cg(from_matrix(A), Vector::Constant(2, 3.0), 1e-12, 10);
  EXPECT_LE(r.iterations, 2);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 1.0, 1e-12);
}

TEST(Cg, RandomSpdWithAndWithoutJacobi) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  Matrix B(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) B(i, j) = nd(rng);
  const Matrix A = B * B.transpose() + 50 * Matrix::Identity(50, 50);
  const Vector x0 = Vector::LinSpaced(50, -1, 1);
  const Vector b = A * x0;
  for (bool pre : {false, true}) {
    const std::optional<Vector> d = pre ? std::optional<Vector>(A.diagonal()) : std::nullopt;
    const CgResult r = cg(from_matrix(A), b, 1e-10, 200, d);
    EXPECT_TRUE(r.converged);
    EXPECT_LE((A * r.x - b).norm(), 1e-10 * b.norm() * 1.0001);
    EXPECT_LE((r.x - x0).norm(), 1e-8 * x0.norm());
  }
}

TEST(Cg, ReportsBreakdownAndBadInput) {
  Matrix A = Matrix::Identity(3, 3);
  A(1, 1) = -1;
  const CgResult r = cg(from_matrix(A), Vector::Unit(3, 1), 1e-10, 10);
  EXPECT_TRUE(r.breakdown);
  EXPECT_EQ(r.breakdown_iteration, 0);
  EXPECT_FALSE(r.converged);
  EXPECT_THROW(cg(from_matrix(A), Vector::Ones(4), 1e-10, 10), std::invalid_argument);
  const CgResult z = cg(from_matrix(A), Vector::Zero(3), 1e-10, 10);
  EXPECT_TRUE(z.converged);
  EXPECT_EQ(z.x.norm(), 0.0);
}

TEST(DtN, ConstantDataGivesSmallFlux) {
  DenseOps d(2);
  const BoundaryOperators bo = d.ops.boundary();
  const CgResult r = solve_dtn(d.mesh, bo, Vector::Ones(d.mesh.vertex_count()), 1e-10, 500);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.x.lpNorm<Eigen::Infinity>(), 1e-2);
}

TEST(DtN, Linear) {
  DenseOps d(2);
  const BoundaryOperators bo = d.ops.boundary();
  const int nv = d.mesh.vertex_count();
  const Vector b1 = nodal_interpolant(d.mesh, [](const Point3 &x) { return x[0]; });
  const Vector b2 = nodal_interpolant(d.mesh, [](const Point3 &x) { return x[1] * x[2]; });
  const Vector x1 = solve_dtn(d.mesh, bo, b1, 1e-12, 500).x;
  const Vector x2 = solve_dtn(d.mesh, bo, b2, 1e-12, 500).x;
  const Vector x3 = solve_dtn(d.mesh, bo, 2 * b1 - b2, 1e-12, 500).x;
  EXPECT_LE((x3 - (2 * x1 - x2)).norm(), 1e-8 * x3.norm());
  EXPECT_EQ(nv, b1.size());
}

TEST(DtN, ErrorDecreasesUnderRefinement) {
  double prev = 0.0;
  for (int level = 1; level <= 2; ++level) {
    DenseOps d(level);
    const ConvergenceRow r = solve_problem(d.mesh, d.ops, Method::dense, Problem::dtn,
                                           TestCase::point1, d.geo.params);
    EXPECT_TRUE(r.converged);
    if (level > 1) {
      EXPECT_LT(r.l2_error, 0.75 * prev);
    }
    prev = r.l2_error;
  }
}

TEST(NtD, ZeroDataAndMean) {
  DenseOps d(2);
  const BoundaryOperators bo = d.ops.boundary();
  const NtdResult z = solve_ntd(d.mesh, bo, Vector::Zero(d.mesh.triangle_count()), 1e-10, 500);
  EXPECT_EQ(z.cg.x.norm(), 0.0);
  EXPECT_GT(z.alpha, 0.0);
  const Vector g = l2_project(d.mesh, Space::P0, test_traces(TestCase::poly).neumann_field());
  const NtdResult r = solve_ntd(d.mesh, bo, g, 1e-10, 500, 0.3);
  const MixedMass M(d.mesh);
  const Vector a = M.apply_transpose(Vector::Ones(d.mesh.triangle_count()));
  EXPECT_NEAR(a.dot(r.cg.x) / a.sum(), 0.3, 1e-12);
  // W annihilates constants, so the shift does not change W x
  const NtdResult r0 = solve_ntd(d.mesh, bo, g, 1e-10, 500, 0.0);
  EXPECT_LE((bo.W(r.cg.x) - bo.W(r0.cg.x)).norm(), 1e-8 * bo.W(r.cg.x).norm());
}

TEST(NtD, ErrorDecreasesUnderRefinement) {
  double prev = 0.0;
  for (int level = 1; level <= 2; ++level) {
    DenseOps d(level);
    const ConvergenceRow r = solve_problem(d.mesh, d.ops, Method::dense, Problem::ntd,
                                           TestCase::poly, d.geo.params);
    EXPECT_TRUE(r.converged);
    if (level > 1) {
      EXPECT_LT(r.l2_error, 0.5 * prev);
    }
    prev = r.l2_error;
  }
}

TEST(Operators, SymmetryAndKernelOfW) {
  DenseOps d(2);
  const Matrix G = d.ops.G->dense(), W = d.ops.W->dense();
  EXPECT_LE((G - G.transpose()).norm(), 1e-12 * G.norm());
  EXPECT_LE((W - W.transpose()).norm(), 1e-12 * W.norm());
  EXPECT_LE((W * Vector::Ones(W.cols())).norm(), 1e-10 * W.norm());
}

TEST(Study, SlopeAndParsing) {
  EXPECT_NEAR(convergence_slope({1, 0.5, 0.25}, {3, 0.75, 0.1875}), 2.0, 1e-12);
  EXPECT_THROW(convergence_slope({1}, {1}), std::invalid_argument);
  EXPECT_THROW(parse_method("fmm"), std::invalid_argument);
  EXPECT_EQ(parse_problem("ntd"), Problem::ntd);
  const Parameters p = sphere_schedule(5);
  EXPECT_EQ(p.order, 5);
  EXPECT_EQ(p.leaf_size, 25);
  EXPECT_DOUBLE_EQ(p.eps_aca, 1e-5);
  EXPECT_DOUBLE_EQ(p.eps_slv, 1e-6);
}
