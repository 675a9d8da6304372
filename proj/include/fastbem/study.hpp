#pragma once

// Parameter schedules and the experiment drivers shared by the command line
// tool and the acceptance suite: operator construction per method,
// convergence rows, compression benchmarks and dense-oracle comparisons.

#include "gca.hpp"
#include "hca.hpp"
#include "solver.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fastbem {

enum class Method { hca, gca, dense };
enum class Problem { dtn, ntd };

inline const char *to_string(Method m) {
  switch (m) {
  case Method::hca: return "hca";
  case Method::gca: return "gca";
  case Method::dense: return "dense";
  }
  return "?";
}
inline const char *to_string(Problem p) { return p == Problem::dtn ? "dtn" : "ntd"; }

inline Method parse_method(const std::string &s) {
  if (s == "hca") return Method::hca;
  if (s == "gca") return Method::gca;
  if (s == "dense") return Method::dense;
  throw std::invalid_argument("unknown method '" + s + "'");
}
inline Problem parse_problem(const std::string &s) {
  if (s == "dtn") return Problem::dtn;
  if (s == "ntd") return Problem::ntd;
  throw std::invalid_argument("unknown problem '" + s + "'");
}

struct Parameters {
  int order = 4;      ///< interpolation order (HCA) or Green quadrature order (GCA)
  int leaf_size = 16;
  int q_near = 4;
  double eta = 1.0;
  double eps_aca = 1e-4;
  double eps_comp = 1e-4; ///< HCA recompression; 0 disables
  double eps_slv = 1e-5;
  int max_it = 2000;
  int dense_cap = default_dense_cap;
};

/// Sphere refinement level l has 8 * 4^l triangles.  Level 5 (8192 triangles)
/// uses m = 5, r_leaf = 25, q_near = 4, eps = 1e-5 and the solver one order
/// tighter; every further level divides the tolerances by 10 and raises m.
/// Coarser levels keep m = 4 and eps = 1e-4.
inline Parameters sphere_schedule(int level) {
  Parameters p;
  p.order = std::max(4, level);
  p.leaf_size = p.order * p.order;
  p.q_near = 4;
  p.eps_aca = std::pow(10.0, -std::max(4, level));
  p.eps_comp = p.eps_aca;
  p.eps_slv = 0.1 * p.eps_aca;
  return p;
}

/// Dense, H-matrix or H2-matrix operator with a common interface.
class AnyMatrix {
public:
  using Storage = std::variant<Matrix, HMatrix, H2Matrix>;
  explicit AnyMatrix(Storage m) : m_(std::move(m)) {}

  [[nodiscard]] Vector apply(const Vector &x) const {
    return std::visit(
        [&](const auto &m) -> Vector {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Matrix>) {
            if (x.size() != m.cols()) throw std::invalid_argument("matvec: dimension mismatch");
            return m * x;
          } else {
            return m.apply(x);
          }
        },
        m_);
  }
  [[nodiscard]] Vector apply_transpose(const Vector &x) const {
    return std::visit(
        [&](const auto &m) -> Vector {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Matrix>) {
            if (x.size() != m.rows()) throw std::invalid_argument("matvec: dimension mismatch");
            return m.transpose() * x;
          } else {
            return m.apply_transpose(x);
          }
        },
        m_);
  }
  [[nodiscard]] Vector diagonal() const {
    return std::visit(
        [](const auto &m) -> Vector {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Matrix>)
            return m.diagonal();
          else
            return m.diagonal();
        },
        m_);
  }
  [[nodiscard]] Matrix dense() const {
    return std::visit(
        [](const auto &m) -> Matrix {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Matrix>)
            return m;
          else
            return m.dense();
        },
        m_);
  }
  [[nodiscard]] StorageReport storage() const {
    return std::visit(
        [](const auto &m) -> StorageReport {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Matrix>)
            return dense_storage(m.rows(), m.cols());
          else
            return m.storage();
        },
        m_);
  }
  [[nodiscard]] int rows() const {
    return std::visit([](const auto &m) { return static_cast<int>(m.rows()); }, m_);
  }
  [[nodiscard]] int cols() const {
    return std::visit([](const auto &m) { return static_cast<int>(m.cols()); }, m_);
  }

  [[nodiscard]] Storage &get() { return m_; }
  [[nodiscard]] const Storage &get() const { return m_; }

private:
  Storage m_;
};

/// Shared geometry for one mesh and parameter set: assembler, quadrature,
/// cluster trees for both spaces and the four block trees.
struct Geometry {
  const SurfaceMesh *mesh;
  Parameters params;
  std::shared_ptr<GalerkinAssembler> assembler;
  std::shared_ptr<SurfaceQuadrature> quad;
  std::shared_ptr<const ClusterTree> tree[2];    ///< indexed by Space
  std::shared_ptr<const BlockTree> blocks[2][2]; ///< [row space][col space]

  Geometry(const SurfaceMesh &m, const Parameters &p) : mesh(&m), params(p) {
    assembler = std::make_shared<GalerkinAssembler>(m, p.q_near);
    quad = std::make_shared<SurfaceQuadrature>(m, p.q_near);
    for (Space s : {Space::P0, Space::P1}) {
      const auto boxes = support_boxes(m, s);
      tree[idx(s)] = std::make_shared<ClusterTree>(boxes, p.leaf_size);
    }
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        blocks[r][c] = std::make_shared<BlockTree>(*tree[r], *tree[c], p.eta);
  }

  static int idx(Space s) { return s == Space::P0 ? 0 : 1; }
  [[nodiscard]] std::shared_ptr<const BlockTree> block_tree(KernelKind k) const {
    const OperatorSpec s = operator_spec(k);
    return blocks[idx(s.row.space)][idx(s.col.space)];
  }
};

/// Compressed operators of one method with GCA bases shared between them.
class OperatorBuilder {
public:
  OperatorBuilder(const Geometry &geo, Method method) : geo_(&geo), method_(method) {}

  [[nodiscard]] AnyMatrix build(KernelKind kind, bool with_nearfield = true) {
    const Parameters &p = geo_->params;
    const OperatorSpec spec = operator_spec(kind);
    const auto rt = geo_->tree[Geometry::idx(spec.row.space)];
    const auto ct = geo_->tree[Geometry::idx(spec.col.space)];
    switch (method_) {
    case Method::dense:
      return AnyMatrix(assemble_dense(*geo_->assembler, kind, p.dense_cap));
    case Method::hca: {
      RankStats st;
      HMatrix h = assemble_hmatrix(kind, *geo_->assembler, *geo_->quad, rt, ct,
                                   geo_->block_tree(kind),
                                   {p.order, p.eps_aca, p.eps_comp}, &st, with_nearfield);
      stats_ = st;
      return AnyMatrix(std::move(h));
    }
    case Method::gca: {
      auto rb = basis(spec.row), cb = basis(spec.col);
      H2Matrix h = assemble_h2(kind, *geo_->assembler, rb, cb, geo_->block_tree(kind),
                               with_nearfield);
      const auto active = h.active_clusters(true);
      stats_ = basis_rank_stats(*rb, &active);
      return AnyMatrix(std::move(h));
    }
    }
    throw std::logic_error("unreachable");
  }

  [[nodiscard]] const RankStats &last_stats() const { return stats_; }

private:
  std::shared_ptr<const ClusterBasis> basis(const SideSpec &side) {
    const int k = Geometry::idx(side.space) * 2 + (side.trace == Trace::normal ? 1 : 0);
    if (!bases_[k]) {
      const auto tree = geo_->tree[Geometry::idx(side.space)];
      bases_[k] = build_gca_basis(tree, *geo_->quad, side,
                                  {geo_->params.order, geo_->params.eps_aca});
    }
    return bases_[k];
  }

  const Geometry *geo_;
  Method method_;
  std::shared_ptr<const ClusterBasis> bases_[4];
  RankStats stats_;
};

using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// The three operators G, K, W of one method.
struct OperatorTriple {
  std::optional<AnyMatrix> G, K, W;
  double seconds = 0.0;

  [[nodiscard]] BoundaryOperators boundary() const {
    BoundaryOperators ops;
    ops.G = {G->rows(), [this](const Vector &x) { return G->apply(x); }};
    ops.K = {K->rows(), [this](const Vector &x) { return K->apply(x); }};
    ops.Kt = {K->cols(), [this](const Vector &x) { return K->apply_transpose(x); }};
    ops.W = {W->rows(), [this](const Vector &x) { return W->apply(x); }};
    ops.G_diag = G->diagonal();
    ops.W_diag = W->diagonal();
    return ops;
  }

  [[nodiscard]] StorageReport storage() const {
    StorageReport r;
    r += G->storage();
    r += K->storage();
    r += W->storage();
    return r;
  }
};

inline OperatorTriple build_operators(const Geometry &geo, Method method) {
  const auto t0 = Clock::now();
  OperatorBuilder b(geo, method);
  OperatorTriple t;
  t.G.emplace(b.build(KernelKind::slp));
  t.K.emplace(b.build(KernelKind::dlp_y));
  t.W.emplace(b.build(KernelKind::hyp));
  t.seconds = seconds_since(t0);
  return t;
}

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  Method method{};
  Problem problem{};
  TestCase test_case{};
  double l2_error = 0.0;
  double energy_error = 0.0;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  std::size_t bytes = 0;
};

inline const char *convergence_header() {
  return "n,h,method,problem,case,l2_error,energy_error,iters,seconds,bytes";
}

inline std::string format_row(const ConvergenceRow &r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%s,%s,%s,%.17g,%.17g,%d,%.3f,%zu", r.n, r.h,
                to_string(r.method), to_string(r.problem), to_string(r.test_case),
                r.l2_error, r.energy_error, r.iterations, r.seconds, r.bytes);
  return buf;
}

/// Dirichlet data: nodal values at the vertices.
inline Vector nodal_interpolant(const SurfaceMesh &mesh, const ScalarField &f) {
  Vector b(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) b[v] = f(mesh.vertex(v));
  return b;
}

/// Solves one problem with operators already built.  The energy error is
/// sqrt(d^T A d) with d the difference to the L2 projection of the exact
/// trace and A = G (Neumann traces) or W (Dirichlet traces).
inline ConvergenceRow solve_problem(const SurfaceMesh &mesh, const OperatorTriple &ops,
                                    Method method, Problem problem, TestCase tc,
                                    const Parameters &p) {
  const auto t0 = Clock::now();
  const TestSolution sol = test_traces(tc);
  const BoundaryOperators bo = ops.boundary();
  ConvergenceRow row;
  row.n = mesh.triangle_count();
  row.h = mesh_width(mesh);
  row.method = method;
  row.problem = problem;
  row.test_case = tc;
  if (problem == Problem::dtn) {
    const Vector b = nodal_interpolant(mesh, sol.dirichlet_field());
    const CgResult r = solve_dtn(mesh, bo, b, p.eps_slv, p.max_it);
    row.iterations = r.iterations;
    row.converged = r.converged;
    row.l2_error = l2_error(mesh, Space::P0, r.x, sol.neumann_field());
    const Vector d = r.x - l2_project(mesh, Space::P0, sol.neumann_field());
    row.energy_error = energy_error(bo.G.apply, d);
    row.bytes = ops.G->storage().total();
  } else {
    const Vector b = l2_project(mesh, Space::P0, sol.neumann_field());
    const double mean = integral(mesh, sol.dirichlet_field()) / mesh.surface_area();
    const NtdResult r = solve_ntd(mesh, bo, b, p.eps_slv, p.max_it, mean);
    row.iterations = r.cg.iterations;
    row.converged = r.cg.converged;
    row.l2_error = l2_error(mesh, Space::P1, r.cg.x, sol.dirichlet_field());
    const Vector d = r.cg.x - l2_project(mesh, Space::P1, sol.dirichlet_field());
    row.energy_error = energy_error(bo.W.apply, d);
    row.bytes = ops.W->storage().total();
  }
  row.seconds = seconds_since(t0) + ops.seconds;
  return row;
}

/// Least-squares slope of log(err) against log(h).
inline double convergence_slope(const std::vector<double> &h, const std::vector<double> &err) {
  if (h.size() != err.size() || h.size() < 2)
    throw std::invalid_argument("convergence_slope needs at least two points");
  const double n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct BenchRow {
  int level = 0;
  int n = 0;
  Method method{};
  double setup_seconds = 0.0;
  StorageReport storage;
  std::optional<std::size_t> dense_bytes;
  RankStats ranks;
};

inline const char *bench_header() {
  return "level,n,method,setup_seconds_per_n,bytes_per_n,basis,coupling,lowrank,nearfield,"
         "dense_bytes_per_n,max_rank,mean_rank";
}

inline std::string format_bench(const BenchRow &r) {
  char buf[512];
  const double n = r.n;
  std::string dense = r.dense_bytes ? std::to_string(static_cast<double>(*r.dense_bytes) / n) : "";
  std::snprintf(buf, sizeof buf, "%d,%d,%s,%.6g,%.6g,%zu,%zu,%zu,%zu,%s,%d,%.3f", r.level, r.n,
                to_string(r.method), r.setup_seconds / n,
                static_cast<double>(r.storage.total()) / n, r.storage.basis, r.storage.coupling,
                r.storage.lowrank, r.storage.nearfield, dense.c_str(),
                r.ranks.blocks > 0 ? r.ranks.max_rank : 0,
                r.ranks.blocks > 0 ? r.ranks.mean_rank : 0.0);
  return buf;
}

/// Storage of the single-layer matrix; near-field entries are not computed
/// because only their count matters here.
inline BenchRow compress_bench(const SurfaceMesh &mesh, int level, Method method,
                               const Parameters &p) {
  const auto t0 = Clock::now();
  const Geometry geo(mesh, p);
  OperatorBuilder b(geo, method);
  BenchRow row;
  row.level = level;
  row.n = mesh.triangle_count();
  row.method = method;
  if (method == Method::dense) {
    row.storage = dense_storage(row.n, row.n);
  } else {
    const AnyMatrix g = b.build(KernelKind::slp, false);
    row.storage = g.storage();
    row.ranks = b.last_stats();
  }
  row.setup_seconds = seconds_since(t0);
  if (row.n <= p.dense_cap) row.dense_bytes = dense_storage(row.n, row.n).total();
  return row;
}

struct OracleRow {
  KernelKind kind{};
  Method method{};
  double frobenius = 0.0; ///< |A_c - A|_F / |A|_F
  double matvec = 0.0;    ///< max over random x of |(A_c - A) x| / |A x|
  std::string worst_block; ///< far-field block with the largest error
  bool pass = false;
};

/// Draws `count` standard normal vectors of length n.
inline std::vector<Vector> random_vectors(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<Vector> out(count, Vector(n));
  for (auto &v : out)
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return out;
}

namespace detail {
/// Far-field block of the compressed matrix with the largest Frobenius
/// deviation from the dense reference.
inline std::string worst_block(const AnyMatrix &a, const Matrix &ref) {
  const BlockTree *bt = nullptr;
  const ClusterTree *rt = nullptr, *ct = nullptr;
  std::visit(
      [&](const auto &m) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(m)>, Matrix>) {
          bt = &m.block_tree();
          rt = &m.row_tree();
          ct = &m.col_tree();
        }
      },
      a.get());
  if (!bt) return "";
  const Matrix dense = a.dense();
  double worst = -1.0;
  std::string name;
  for (int id : bt->farfield()) {
    const Block &b = (*bt)[id];
    const auto rd = rt->dofs(b.row), cd = ct->dofs(b.col);
    double err = 0.0;
    for (int i : rd)
      for (int j : cd) err += std::pow(dense(i, j) - ref(i, j), 2);
    if (err > worst) {
      worst = err;
      name = "(" + std::to_string(b.row) + "," + std::to_string(b.col) + ")";
    }
  }
  return name;
}
} // namespace detail

inline OracleRow compare_with_dense(const AnyMatrix &a, const Matrix &ref, KernelKind kind,
                                    Method method, double tol, std::uint64_t seed) {
  OracleRow r;
  r.kind = kind;
  r.method = method;
  const Matrix d = a.dense();
  r.frobenius = (d - ref).norm() / ref.norm();
  for (const Vector &x : random_vectors(static_cast<int>(ref.cols()), 10, seed)) {
    const Vector y = ref * x;
    r.matvec = std::max(r.matvec, (a.apply(x) - y).norm() / y.norm());
  }
  r.pass = r.frobenius <= tol && r.matvec <= tol;
  r.worst_block = detail::worst_block(a, ref);
  return r;
}

} // namespace fastbem
