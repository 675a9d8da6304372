#pragma once

// Laplace free-space kernel g(x,y) = 1/(4 pi |x-y|) and its normal
// derivatives.

#include "mesh.hpp"

#include <numbers>
#include <stdexcept>

namespace fastbem {

inline constexpr double inv_4pi = 0.25 / std::numbers::pi;

inline double laplace_kernel(const Point3 &x, const Point3 &y) {
  const double r = (x - y).norm();
  return r > 0.0 ? inv_4pi / r : 0.0;
}

enum class Side { x, y };

/// Derivative of g in direction n with respect to the chosen argument.
inline double kernel_dn(const Point3 &x, const Point3 &y, const Point3 &n,
                        Side side) {
  const Point3 d = x - y;
  const double r2 = d.squaredNorm();
  if (!(r2 > 0.0))
    throw std::domain_error("kernel_dn: normal derivative undefined for x == y");
  const double r3 = r2 * std::sqrt(r2);
  const double s = inv_4pi * d.dot(n) / r3;
  return side == Side::y ? s : -s;
}

/// d/dn_x d/dn_y g(x,y).
inline double kernel_dndn(const Point3 &x, const Point3 &y, const Point3 &nx,
                          const Point3 &ny) {
  const Point3 d = x - y;
  const double r2 = d.squaredNorm();
  if (!(r2 > 0.0))
    throw std::domain_error("kernel_dndn: undefined for x == y");
  const double r = std::sqrt(r2);
  const double r3 = r2 * r;
  return inv_4pi * (nx.dot(ny) / r3 - 3.0 * d.dot(nx) * d.dot(ny) / (r3 * r2));
}

/// Galerkin operators: slp = single layer (P0 x P0), dlp_y = double layer
/// (P0 x P1), dlp_x = its transpose (P1 x P0), hyp = hypersingular (P1 x P1).
enum class KernelKind { slp, dlp_y, dlp_x, hyp };

inline const char *to_string(KernelKind k) {
  switch (k) {
  case KernelKind::slp: return "slp";
  case KernelKind::dlp_y: return "dlp";
  case KernelKind::dlp_x: return "dlp_adjoint";
  case KernelKind::hyp: return "hyp";
  }
  return "?";
}

} // namespace fastbem
