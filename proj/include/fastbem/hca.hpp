#pragma once

// Hybrid cross approximation: the kernel is interpolated on tensor Chebyshev
// grids, the small coefficient matrix is cross-approximated, and the pivots
// are turned back into single surface integrals.

#include "hmatrix.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastbem {

struct InterpGrid {
  int m = 0;
  BoundingBox box;
  std::array<std::vector<double>, 3> nodes;
  std::vector<Point3> points; ///< m^3, index (i0 * m + i1) * m + i2

  [[nodiscard]] int size() const { return static_cast<int>(points.size()); }
};

/// Chebyshev roots cos((2i+1) pi / 2m) on [-1, 1].
inline std::vector<double> chebyshev_nodes(int m) {
  std::vector<double> x(m);
  for (int i = 0; i < m; ++i) x[i] = std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * m));
  return x;
}

inline InterpGrid chebyshev_points(const BoundingBox &box, int m) {
  if (m < 1) throw std::invalid_argument("interpolation order must be >= 1");
  InterpGrid g;
  g.m = m;
  g.box = box.nondegenerate();
  const auto ref = chebyshev_nodes(m);
  const Point3 c = g.box.center(), h = 0.5 * g.box.extent();
  for (int ax = 0; ax < 3; ++ax)
    for (double r : ref) g.nodes[ax].push_back(c[ax] + h[ax] * r);
  g.points.reserve(static_cast<std::size_t>(m) * m * m);
  for (int i0 = 0; i0 < m; ++i0)
    for (int i1 = 0; i1 < m; ++i1)
      for (int i2 = 0; i2 < m; ++i2)
        g.points.emplace_back(g.nodes[0][i0], g.nodes[1][i1], g.nodes[2][i2]);
  return g;
}

inline double lagrange_1d(const std::vector<double> &nodes, int i, double x) {
  double v = 1.0;
  for (int j = 0; j < static_cast<int>(nodes.size()); ++j)
    if (j != i) v *= (x - nodes[j]) / (nodes[i] - nodes[j]);
  return v;
}

inline double lagrange_eval(const InterpGrid &g, int nu, const Point3 &x) {
  const int m = g.m;
  const int i2 = nu % m, i1 = (nu / m) % m, i0 = nu / (m * m);
  return lagrange_1d(g.nodes[0], i0, x[0]) * lagrange_1d(g.nodes[1], i1, x[1]) *
         lagrange_1d(g.nodes[2], i2, x[2]);
}

/// Tensor interpolant of g on the grid pair, evaluated at (x, y).
inline double interpolated_kernel(const InterpGrid &gt, const InterpGrid &gs,
                                  const Point3 &x, const Point3 &y) {
  std::vector<double> lt(gt.size()), ls(gs.size());
  for (int nu = 0; nu < gt.size(); ++nu) lt[nu] = lagrange_eval(gt, nu, x);
  for (int mu = 0; mu < gs.size(); ++mu) ls[mu] = lagrange_eval(gs, mu, y);
  double v = 0.0;
  for (int nu = 0; nu < gt.size(); ++nu)
    for (int mu = 0; mu < gs.size(); ++mu)
      v += lt[nu] * laplace_kernel(gt.points[nu], gs.points[mu]) * ls[mu];
  return v;
}

/// Kernel samples s_{nu mu} = g(xi_t,nu, xi_s,mu).
inline Matrix kernel_samples(const InterpGrid &gt, const InterpGrid &gs) {
  Matrix S(gt.size(), gs.size());
  for (int nu = 0; nu < gt.size(); ++nu)
    for (int mu = 0; mu < gs.size(); ++mu)
      S(nu, mu) = laplace_kernel(gt.points[nu], gs.points[mu]);
  return S;
}

/// The HCA kernel sum_{kappa, lambda} g(x, xi_s,kappa) C g(xi_t,lambda, y).
inline double hca_kernel(const InterpGrid &gt, const InterpGrid &gs,
                         const CrossCore &core, const Point3 &x, const Point3 &y) {
  const int k = static_cast<int>(core.row_pivots.size());
  Eigen::VectorXd a(k), b(k);
  for (int q = 0; q < k; ++q) {
    a[q] = laplace_kernel(x, gs.points[core.col_pivots[q]]);
    b[q] = laplace_kernel(gt.points[core.row_pivots[q]], y);
  }
  return a.dot(core.C * b);
}

struct HcaOptions {
  int order = 4;
  double eps_aca = 1e-5;
  double eps_comp = 0.0; ///< > 0 enables recompression of each block
};

struct HcaBlock {
  LowRankFactor factor;
  bool full_rank = false; ///< cross approximation used all m^3 pivots
};

/// Low-rank approximation of the Galerkin block rows x cols of `kind`; the
/// boxes must be admissible.
inline HcaBlock hca_block(const SurfaceQuadrature &quad, KernelKind kind,
                          std::span<const int> rows, const BoundingBox &row_box,
                          std::span<const int> cols, const BoundingBox &col_box,
                          const HcaOptions &opt) {
  const OperatorSpec spec = operator_spec(kind);
  const InterpGrid gt = chebyshev_points(row_box, opt.order);
  const InterpGrid gs = chebyshev_points(col_box, opt.order);
  const CrossCore core = aca_inverse_core(kernel_samples(gt, gs), opt.eps_aca);
  const int k = static_cast<int>(core.row_pivots.size());
  std::vector<Point3> xs(k), xt(k);
  for (int q = 0; q < k; ++q) {
    xs[q] = gs.points[core.col_pivots[q]];
    xt[q] = gt.points[core.row_pivots[q]];
  }
  HcaBlock out;
  out.full_rank = k == gt.size() && !core.rank_deficient;
  LowRankFactor &f = out.factor;
  f.A = spec.sign * potential_matrix(quad, spec.row.space,
                                     potential_kind(spec.row.trace, false), rows, xs);
  f.B = potential_matrix(quad, spec.col.space, potential_kind(spec.col.trace, false),
                         cols, xt);
  f.C = core.C;
  f.row_pivots = core.row_pivots;
  f.col_pivots = core.col_pivots;
  if (opt.eps_comp > 0.0) {
    f = truncate(f, opt.eps_comp);
  }
  return out;
}

/// Far-field leaves from hca_block, near-field leaves from exact Galerkin
/// entries.
inline HMatrix assemble_hmatrix(KernelKind kind, const GalerkinAssembler &assembler,
                                const SurfaceQuadrature &quad,
                                std::shared_ptr<const ClusterTree> rows,
                                std::shared_ptr<const ClusterTree> cols,
                                std::shared_ptr<const BlockTree> blocks,
                                const HcaOptions &opt, RankStats *stats = nullptr,
                                bool with_nearfield = true) {
  HMatrix h(rows, cols, blocks);
  const auto &far = blocks->farfield();
  std::vector<char> flagged(far.size(), 0);
  parallel_for(static_cast<long>(far.size()), [&](long k) {
    const Block &b = (*blocks)[far[k]];
    try {
      HcaBlock hb = hca_block(quad, kind, rows->dofs(b.row), (*rows)[b.row].box,
                              cols->dofs(b.col), (*cols)[b.col].box, opt);
      flagged[k] = hb.full_rank;
      h.farfield(k) = std::move(hb.factor);
    } catch (const std::exception &e) {
      throw std::runtime_error("HCA block (" + std::to_string(b.row) + "," +
                               std::to_string(b.col) + "): " + e.what());
    }
  });
  if (with_nearfield) assemble_nearfield(h, assembler, kind);
  if (stats) {
    *stats = {};
    stats->blocks = static_cast<int>(far.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < far.size(); ++k) {
      const int r = h.farfield(k).rank();
      stats->max_rank = std::max(stats->max_rank, r);
      sum += r;
      stats->flagged += flagged[k];
    }
    stats->mean_rank = far.empty() ? 0.0 : sum / static_cast<double>(far.size());
  }
  return h;
}

} // namespace fastbem
