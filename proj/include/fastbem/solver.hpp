#pragma once

// Preconditioned conjugate gradients and the Dirichlet-to-Neumann and
// Neumann-to-Dirichlet drivers.

#include "discretization.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace fastbem {

struct LinearOperator {
  int dim = 0;
  std::function<Vector(const Vector &)> apply;

  [[nodiscard]] Vector operator()(const Vector &x) const { return apply(x); }
};

struct CgResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0; ///< |b - A x| / |b|
  bool converged = false;
  bool breakdown = false;
  int breakdown_iteration = -1;
};

/// CG with optional diagonal (Jacobi) preconditioner.  Stops when the
/// relative residual reaches eps or after max_it iterations.
inline CgResult cg(const LinearOperator &op, const Vector &b, double eps, int max_it,
                   const std::optional<Vector> &diag = std::nullopt) {
  if (b.size() != op.dim)
    throw std::invalid_argument("cg: right-hand side has size " + std::to_string(b.size()) +
                                ", operator dimension " + std::to_string(op.dim));
  if (diag && diag->size() != op.dim) throw std::invalid_argument("cg: preconditioner size");
  CgResult res;
  res.x = Vector::Zero(op.dim);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  auto precond = [&](const Vector &r) -> Vector {
    if (!diag) return r;
    Vector z(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i)
      z[i] = (*diag)[i] > 0.0 ? r[i] / (*diag)[i] : r[i];
    return z;
  };
  Vector r = b;
  Vector z = precond(r);
  Vector p = z;
  double rz = r.dot(z);
  res.residual = 1.0;
  while (res.iterations < max_it) {
    const Vector ap = op(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      res.breakdown = true;
      res.breakdown_iteration = res.iterations;
      break;
    }
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    ++res.iterations;
    res.residual = r.norm() / bnorm;
    if (res.residual <= eps) {
      res.converged = true;
      break;
    }
    z = precond(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

/// Discrete operators needed by the two drivers.  K acts P1 -> P0; Kt is its
/// transpose.
struct BoundaryOperators {
  LinearOperator G, K, Kt, W;
  Vector G_diag, W_diag;
};

/// G x = (M/2 + K) b for Dirichlet coefficients b (P1); returns Neumann
/// coefficients (P0).
inline CgResult solve_dtn(const SurfaceMesh &mesh, const BoundaryOperators &ops,
                          const Vector &dirichlet, double eps, int max_it) {
  const MixedMass M(mesh);
  const Vector rhs = 0.5 * M.apply(dirichlet) + ops.K(dirichlet);
  return cg(ops.G, rhs, eps, max_it, ops.G_diag);
}

struct NtdResult {
  CgResult cg;
  double alpha = 0.0;
  Vector rhs;
};

/// (W + alpha a a^T) x = (M^T/2 - K^T) b with a = M^T 1, then x is shifted so
/// that its surface mean equals `target_mean`.
inline NtdResult solve_ntd(const SurfaceMesh &mesh, const BoundaryOperators &ops,
                           const Vector &neumann, double eps, int max_it,
                           double target_mean = 0.0) {
  const MixedMass M(mesh);
  NtdResult out;
  out.rhs = 0.5 * M.apply_transpose(neumann) - ops.Kt(neumann);
  const Vector a = M.apply_transpose(Vector::Ones(mesh.triangle_count()));
  out.alpha = ops.W_diag.mean() / a.squaredNorm() * a.size();
  const double alpha = out.alpha;
  const LinearOperator stabilized{ops.W.dim, [&](const Vector &x) -> Vector {
                                    return ops.W(x) + alpha * a.dot(x) * a;
                                  }};
  out.cg = cg(stabilized, out.rhs, eps, max_it, Vector(ops.W_diag.array() + alpha * a.array().square()));
  const double area = a.sum();
  out.cg.x.array() += target_mean - a.dot(out.cg.x) / area;
  return out;
}

} // namespace fastbem
