#pragma once

// P0/P1 boundary element spaces: mixed mass matrix, L2 projection, error
// norms and the harmonic test solutions on the unit sphere.

#include "galerkin.hpp"
#include "kernel.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace fastbem {

using Vector = Eigen::VectorXd;
using ScalarField = std::function<double(const Point3 &)>;

/// Mixed mass matrix M (P0 rows, P1 columns): m_ij = |T_i|/3 if vertex j is a
/// corner of T_i.
class MixedMass {
public:
  explicit MixedMass(const SurfaceMesh &mesh) : mesh_(&mesh) {}

  [[nodiscard]] int rows() const { return mesh_->triangle_count(); }
  [[nodiscard]] int cols() const { return mesh_->vertex_count(); }

  [[nodiscard]] Vector apply(const Vector &b) const {
    if (b.size() != cols()) throw std::invalid_argument("MixedMass::apply: size");
    Vector y(rows());
    for (int t = 0; t < rows(); ++t) {
      const auto &tri = mesh_->triangle(t);
      y[t] = mesh_->area(t) / 3.0 * (b[tri[0]] + b[tri[1]] + b[tri[2]]);
    }
    return y;
  }

  [[nodiscard]] Vector apply_transpose(const Vector &x) const {
    if (x.size() != rows()) throw std::invalid_argument("MixedMass::apply_transpose: size");
    Vector y = Vector::Zero(cols());
    for (int t = 0; t < rows(); ++t)
      for (int v : mesh_->triangle(t)) y[v] += mesh_->area(t) / 3.0 * x[t];
    return y;
  }

  [[nodiscard]] Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows(), cols());
    for (int t = 0; t < rows(); ++t)
      for (int v : mesh_->triangle(t)) m(t, v) += mesh_->area(t) / 3.0;
    return m;
  }

  /// Frobenius norm.
  [[nodiscard]] double norm() const {
    double s = 0.0;
    for (int t = 0; t < rows(); ++t) s += 3.0 * std::pow(mesh_->area(t) / 3.0, 2);
    return std::sqrt(s);
  }

private:
  const SurfaceMesh *mesh_;
};

inline MixedMass assemble_mass(const SurfaceMesh &mesh) { return MixedMass(mesh); }

/// Evaluates a coefficient vector of the given space at barycentric point
/// (1-u-v, u, v) of triangle t.
inline double evaluate(const SurfaceMesh &mesh, Space space, const Vector &c,
                       int t, double u, double v) {
  if (space == Space::P0) return c[t];
  const auto &tri = mesh.triangle(t);
  return (1.0 - u - v) * c[tri[0]] + u * c[tri[1]] + v * c[tri[2]];
}

/// L2 projection of f onto the space; Gram and load use the order-4 rule.
inline Vector l2_project(const SurfaceMesh &mesh, Space space,
                         const ScalarField &f, int q = 4) {
  const auto rule = triangle_rule(q);
  if (space == Space::P0) {
    Vector c(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const Point3 &p0 = mesh.corner(t, 0);
      const Point3 d = mesh.corner(t, 1) - p0, e = mesh.corner(t, 2) - p0;
      double s = 0.0, w = 0.0;
      for (const auto &p : rule) {
        s += p.w * f(p0 + p.u * d + p.v * e);
        w += p.w;
      }
      c[t] = s / w;
    }
    return c;
  }
  const int n = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> trips;
  Vector load = Vector::Zero(n);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto &tri = mesh.triangle(t);
    const Point3 &p0 = mesh.corner(t, 0);
    const Point3 d = mesh.corner(t, 1) - p0, e = mesh.corner(t, 2) - p0;
    const double jac = 2.0 * mesh.area(t);
    Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
    for (const auto &p : rule) {
      const double lam[3] = {1.0 - p.u - p.v, p.u, p.v};
      const double fv = f(p0 + p.u * d + p.v * e);
      for (int a = 0; a < 3; ++a) {
        load[tri[a]] += jac * p.w * lam[a] * fv;
        for (int b = 0; b < 3; ++b) local(a, b) += jac * p.w * lam[a] * lam[b];
      }
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trips.emplace_back(tri[a], tri[b], local(a, b));
  }
  Eigen::SparseMatrix<double> gram(n, n);
  gram.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(gram);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("l2_project: singular Gram matrix");
  return chol.solve(load);
}

/// || u_h - f ||_{L2} over the mesh with the order-4 triangle rule.
inline double l2_error(const SurfaceMesh &mesh, Space space, const Vector &c,
                       const ScalarField &f, int q = 4) {
  const auto rule = triangle_rule(q);
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Point3 &p0 = mesh.corner(t, 0);
    const Point3 d = mesh.corner(t, 1) - p0, e = mesh.corner(t, 2) - p0;
    const double jac = 2.0 * mesh.area(t);
    for (const auto &p : rule) {
      const double diff =
          evaluate(mesh, space, c, t, p.u, p.v) - f(p0 + p.u * d + p.v * e);
      s += jac * p.w * diff * diff;
    }
  }
  return std::sqrt(s);
}

/// Integral of u_h over the surface.
inline double integral(const SurfaceMesh &mesh, Space space, const Vector &c) {
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto &tri = mesh.triangle(t);
    s += space == Space::P0 ? mesh.area(t) * c[t]
                            : mesh.area(t) / 3.0 * (c[tri[0]] + c[tri[1]] + c[tri[2]]);
  }
  return s;
}

inline double integral(const SurfaceMesh &mesh, const ScalarField &f, int q = 4) {
  const auto rule = triangle_rule(q);
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Point3 &p0 = mesh.corner(t, 0);
    const Point3 d = mesh.corner(t, 1) - p0, e = mesh.corner(t, 2) - p0;
    for (const auto &p : rule) s += 2.0 * mesh.area(t) * p.w * f(p0 + p.u * d + p.v * e);
  }
  return s;
}

/// sqrt(d^T G d) for the single-layer action G.
inline double energy_error(const std::function<Vector(const Vector &)> &apply_g,
                           const Vector &d) {
  const double dd = d.squaredNorm();
  if (dd == 0.0) return 0.0;
  const double e = d.dot(apply_g(d));
  if (e < -1e-12 * dd)
    throw std::runtime_error("energy_error: negative energy product " +
                             std::to_string(e) + " (operator not positive)");
  return std::sqrt(std::max(e, 0.0));
}

enum class TestCase { poly, point1, point2 };

inline const char *to_string(TestCase c) {
  switch (c) {
  case TestCase::poly: return "poly";
  case TestCase::point1: return "point1";
  case TestCase::point2: return "point2";
  }
  return "?";
}

inline TestCase parse_test_case(const std::string &s) {
  if (s == "poly") return TestCase::poly;
  if (s == "point1") return TestCase::point1;
  if (s == "point2") return TestCase::point2;
  throw std::invalid_argument("unknown test case '" + s + "'");
}

/// Harmonic function in the unit ball with its Dirichlet and Neumann traces on
/// the unit sphere.  Traces at points off the sphere (flat panels) are taken
/// at the radial projection.
struct TestSolution {
  TestCase id;
  std::function<double(const Point3 &)> u;
  std::function<Point3(const Point3 &)> grad;

  [[nodiscard]] double dirichlet(const Point3 &x) const { return u(x.normalized()); }
  [[nodiscard]] double neumann(const Point3 &x) const {
    const Point3 n = x.normalized();
    return grad(n).dot(n);
  }
  [[nodiscard]] ScalarField dirichlet_field() const {
    return [self = *this](const Point3 &x) { return self.dirichlet(x); };
  }
  [[nodiscard]] ScalarField neumann_field() const {
    return [self = *this](const Point3 &x) { return self.neumann(x); };
  }
};

inline TestSolution test_traces(TestCase id) {
  if (id == TestCase::poly)
    return {id, [](const Point3 &x) { return x[0] * x[0] - x[2] * x[2]; },
            [](const Point3 &x) { return Point3(2 * x[0], 0.0, -2 * x[2]); }};
  const Point3 y = id == TestCase::point1 ? Point3(1.2, 1.2, 1.2)
                                          : Point3(1.0, 0.25, 1.0);
  return {id, [y](const Point3 &x) { return laplace_kernel(x, y); },
          [y](const Point3 &x) {
            const Point3 d = x - y;
            return Point3(-inv_4pi * d / std::pow(d.norm(), 3));
          }};
}

} // namespace fastbem
