#include <fastbem/study.hpp>

#include <gtest/gtest.h>

#include <string>

using namespace fastbem;

namespace {
struct Ops {
  SurfaceMesh mesh = sphere_mesh(2);
  Parameters params = [] {
    Parameters p;
    p.leaf_size = 6;
    p.eps_aca = 1e-5;
    p.eps_comp = 1e-5;
    return p;
  }();
};
} // namespace

class Containers : public ::testing::TestWithParam<std::tuple<Method, KernelKind>> {};

TEST_P(Containers, MatvecContract) {
  const auto [method, kind] = GetParam();
  Ops o;
  o.params.order = method == Method::hca ? 4 : 3;
  const Geometry geo(o.mesh, o.params);
  OperatorBuilder b(geo, method);
  const AnyMatrix a = b.build(kind);
  const Matrix ref = assemble_dense(*geo.assembler, kind);
  // zero in, zero out
  EXPECT_EQ(a.apply(Vector::Zero(a.cols())).norm(), 0.0);
  EXPECT_EQ(a.apply_transpose(Vector::Zero(a.rows())).norm(), 0.0);
  EXPECT_THROW(a.apply(Vector::Zero(a.cols() + 1)), std::invalid_argument);
  const auto xs = random_vectors(a.cols(), 10, 42);
  const auto ys = random_vectors(a.rows(), 10, 43);
  for (int k = 0; k < 10; ++k) {
    const Vector y = ref * xs[k];
    EXPECT_LE((a.apply(xs[k]) - y).norm(), 10 * 1e-5 * y.norm());
    const double lhs = a.apply(xs[k]).dot(ys[k]), rhs = xs[k].dot(a.apply_transpose(ys[k]));
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
  }
  const Vector lin = a.apply(2.0 * xs[0] - 3.0 * xs[1]);
  EXPECT_LE((lin - (2.0 * a.apply(xs[0]) - 3.0 * a.apply(xs[1]))).norm(), 1e-12 * lin.norm());
  // deterministic
  EXPECT_EQ(a.apply(xs[2]), a.apply(xs[2]));
  // storage categories sum and repeat exactly
  const StorageReport s = a.storage();
  EXPECT_EQ(s.total(), s.basis + s.coupling + s.lowrank + s.nearfield);
  EXPECT_EQ(b.build(kind).storage().total(), s.total());
}

INSTANTIATE_TEST_SUITE_P(
    All, Containers,
    ::testing::Combine(::testing::Values(Method::hca, Method::gca),
                       ::testing::Values(KernelKind::slp, KernelKind::dlp_y, KernelKind::dlp_x,
                                         KernelKind::hyp)),
    [](const auto &info) {
      return std::string(to_string(std::get<0>(info.param))) + "_" +
             to_string(std::get<1>(info.param));
    });

TEST(Dense, StorageAndCap) {
  EXPECT_EQ(dense_storage(10, 10).total(), 800u);
  const SurfaceMesh m = sphere_mesh(2);
  const GalerkinAssembler g(m, 3);
  EXPECT_THROW(assemble_dense(g, KernelKind::slp, 100), std::length_error);
}

TEST(Dense, EqualsAllNearfieldHMatrix) {
  const SurfaceMesh m = sphere_mesh(1);
  Parameters p;
  p.eta = 1e-8;
  p.leaf_size = 4;
  const Geometry geo(m, p);
  OperatorBuilder b(geo, Method::hca);
  const AnyMatrix h = b.build(KernelKind::slp);
  EXPECT_EQ(h.dense(), assemble_dense(*geo.assembler, KernelKind::slp));
}

TEST(Storage, HcaBelowGcaAndModestGrowth) {
  std::vector<double> per_n;
  for (int level = 3; level <= 4; ++level) {
    const SurfaceMesh m = sphere_mesh(level);
    const Parameters p = sphere_schedule(level);
    const BenchRow h = compress_bench(m, level, Method::hca, p);
    const BenchRow g = compress_bench(m, level, Method::gca, p);
    EXPECT_LE(h.storage.total(), g.storage.total()) << level;
    per_n.push_back(static_cast<double>(h.storage.total()) / m.triangle_count());
  }
  EXPECT_LT(per_n[1], 2.5 * per_n[0]);
}

TEST(Storage, SharedBasisCountedOnce) {
  const SurfaceMesh m = sphere_mesh(3);
  Parameters p;
  p.order = 3;
  const Geometry geo(m, p);
  OperatorBuilder b(geo, Method::gca);
  const AnyMatrix g = b.build(KernelKind::slp);
  const AnyMatrix k = b.build(KernelKind::dlp_y);
  const auto &hg = std::get<H2Matrix>(g.get());
  const auto &hk = std::get<H2Matrix>(k.get());
  EXPECT_EQ(&hg.row_basis(), &hk.row_basis());
  const StorageReport both = combined_storage({&hg, &hk});
  EXPECT_LT(both.total(), hg.storage().total() + hk.storage().total());
  EXPECT_EQ(both.coupling, hg.storage().coupling + hk.storage().coupling);
}

TEST(Oracle, ToleranceSweep) {
  const SurfaceMesh m = sphere_mesh(3);
  Parameters p;
  const Geometry base(m, p);
  const Matrix ref = assemble_dense(*base.assembler, KernelKind::slp);
  for (Method method : {Method::hca, Method::gca}) {
    double err[2];
    for (int k = 0; k < 2; ++k) {
      p.eps_aca = p.eps_comp = k ? 1e-6 : 1e-2;
      const Geometry geo(m, p);
      OperatorBuilder b(geo, method);
      err[k] = compare_with_dense(b.build(KernelKind::slp), ref, KernelKind::slp, method, 1.0, 9)
                   .frobenius;
    }
    EXPECT_GE(err[0], 100 * err[1]) << to_string(method);
  }
}

TEST(Bench, RanksOnlyWithFarField) {
  const SurfaceMesh m = sphere_mesh(2);
  const Parameters p = sphere_schedule(2);
  for (Method method : {Method::hca, Method::gca}) {
    const BenchRow r = compress_bench(m, 2, method, p);
    EXPECT_EQ(r.ranks.max_rank, 0);
    EXPECT_TRUE(r.dense_bytes.has_value());
  }
  Parameters big = p;
  big.dense_cap = 100;
  EXPECT_FALSE(compress_bench(m, 2, Method::hca, big).dense_bytes.has_value());
  const BenchRow r3 = compress_bench(sphere_mesh(3), 3, Method::gca, sphere_schedule(3));
  EXPECT_GT(r3.ranks.max_rank, 0);
}

TEST(Oracle, CorruptedBlockIsNamed) {
  const SurfaceMesh m = sphere_mesh(3);
  const Geometry geo(m, Parameters{});
  OperatorBuilder b(geo, Method::gca);
  AnyMatrix a = b.build(KernelKind::slp);
  auto &h = std::get<H2Matrix>(a.get());
  h.coupling(3) *= 2.0;
  const Block &blk = h.block_tree()[h.block_tree().farfield()[3]];
  const Matrix ref = assemble_dense(*geo.assembler, KernelKind::slp);
  const OracleRow r = compare_with_dense(a, ref, KernelKind::slp, Method::gca, 1e-4, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.worst_block, "(" + std::to_string(blk.row) + "," + std::to_string(blk.col) + ")");
}
