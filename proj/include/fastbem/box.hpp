#pragma once

#include "mesh.hpp"

#include <algorithm>
#include <limits>

namespace fastbem {

/// Axis-parallel box [a, b].
struct BoundingBox {
  Point3 a = Point3::Constant(std::numeric_limits<double>::infinity());
  Point3 b = Point3::Constant(-std::numeric_limits<double>::infinity());

  BoundingBox() = default;
  BoundingBox(const Point3 &lo, const Point3 &hi) : a(lo), b(hi) {}

  [[nodiscard]] bool empty() const { return !(a.array() <= b.array()).all(); }

  void include(const Point3 &p) {
    a = a.cwiseMin(p);
    b = b.cwiseMax(p);
  }
  void include(const BoundingBox &o) {
    a = a.cwiseMin(o.a);
    b = b.cwiseMax(o.b);
  }

  [[nodiscard]] Point3 center() const { return 0.5 * (a + b); }
  [[nodiscard]] Point3 extent() const { return b - a; }
  [[nodiscard]] double diameter() const { return (b - a).norm(); }
  [[nodiscard]] double longest_edge() const { return (b - a).maxCoeff(); }

  [[nodiscard]] bool contains(const Point3 &p) const {
    return (p.array() >= a.array()).all() && (p.array() <= b.array()).all();
  }
  [[nodiscard]] bool contains(const BoundingBox &o) const {
    return contains(o.a) && contains(o.b);
  }

  /// Euclidean distance between two boxes (0 if they touch or overlap).
  [[nodiscard]] double distance(const BoundingBox &o) const {
    const Point3 gap =
        (o.a - b).cwiseMax(a - o.b).cwiseMax(Point3::Zero());
    return gap.norm();
  }
  [[nodiscard]] double distance(const Point3 &p) const {
    const Point3 gap = (p - b).cwiseMax(a - p).cwiseMax(Point3::Zero());
    return gap.norm();
  }

  /// Copy with every axis at least `min_width` wide (kept centered).
  [[nodiscard]] BoundingBox widened(double min_width) const {
    BoundingBox r = *this;
    for (int k = 0; k < 3; ++k) {
      const double w = b[k] - a[k];
      if (w < min_width) {
        const double pad = 0.5 * (min_width - w);
        r.a[k] -= pad;
        r.b[k] += pad;
      }
    }
    return r;
  }

  /// Widen degenerate axes to 1e-12 times the longest edge.
  [[nodiscard]] BoundingBox nondegenerate() const {
    const double ext = std::max(longest_edge(), 1e-300);
    return widened(1e-12 * ext);
  }
};

} // namespace fastbem
