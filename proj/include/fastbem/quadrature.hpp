#pragma once

// Gauss rules on [0,1] and triangles, plus the regularizing panel-pair rules
// for coincident, edge-adjacent and vertex-adjacent triangles.

#include "mesh.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fastbem {

struct QuadRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// q-point Gauss-Legendre rule on [0,1].
inline QuadRule1D gauss_legendre(int q) {
  if (q < 1) throw std::invalid_argument("Gauss rule order must be >= 1");
  // Returns (P_q(x), P_q'(x)) by the three-term recurrence.
  auto legendre = [q](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= q; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, q * (x * p1 - p0) / (x * x - 1.0)};
  };
  QuadRule1D rule;
  rule.points.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    rule.points[q - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[q - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

/// Point on the reference triangle {u, v >= 0, u + v <= 1}.
struct TrianglePoint {
  double u, v, w;
};

/// Collapsed (Duffy) tensor rule with q*q points; weights sum to 1/2.
inline std::vector<TrianglePoint> triangle_rule(int q) {
  const QuadRule1D g = gauss_legendre(q);
  std::vector<TrianglePoint> pts;
  pts.reserve(q * q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const double a = g.points[i];
      pts.push_back({a, (1.0 - a) * g.points[j],
                     g.weights[i] * g.weights[j] * (1.0 - a)});
    }
  return pts;
}

enum class PairCase { identical, shared_edge, shared_vertex, disjoint };

inline const char *to_string(PairCase c) {
  switch (c) {
  case PairCase::identical: return "identical";
  case PairCase::shared_edge: return "shared_edge";
  case PairCase::shared_vertex: return "shared_vertex";
  case PairCase::disjoint: return "disjoint";
  }
  return "?";
}

inline PairCase classify_panel_pair(const Triangle &a, const Triangle &b) {
  int common = 0;
  for (int i : a)
    for (int j : b) common += (i == j);
  switch (common) {
  case 3: return PairCase::identical;
  case 2: return PairCase::shared_edge;
  case 1: return PairCase::shared_vertex;
  default: return PairCase::disjoint;
  }
}

/// Number of regularizing subdomains per case.
inline int subdomain_count(PairCase c) {
  switch (c) {
  case PairCase::identical: return 6;
  case PairCase::shared_edge: return 5;
  case PairCase::shared_vertex: return 2;
  case PairCase::disjoint: return 1;
  }
  return 0;
}

/// Quadrature point of a panel-pair rule: reference coordinates on both
/// panels (standard simplex) and a weight for integrating over T x T.
/// The rule integrates over reference x reference, so the total weight of a
/// smooth integrand equals 1/4.
struct PairPoint {
  double ux, vx, uy, vy, w;
};

struct PanelPairRule {
  PairCase kind;
  std::vector<PairPoint> points;
};

/// Builds the panel-pair rule for the given case.  Conventions for the
/// singular cases: the shared vertex is local corner 0 of both panels, the
/// shared edge runs from corner 0 to corner 1 on both panels.
inline PanelPairRule sauter_schwab_rule(PairCase kind, int q) {
  if (q < 1) throw std::invalid_argument("panel-pair rule order must be >= 1");
  PanelPairRule rule{kind, {}};
  if (kind == PairCase::disjoint) {
    const auto tr = triangle_rule(q);
    rule.points.reserve(tr.size() * tr.size());
    for (const auto &a : tr)
      for (const auto &b : tr)
        rule.points.push_back({a.u, a.v, b.u, b.v, a.w * b.w});
    return rule;
  }
  const QuadRule1D g = gauss_legendre(q);
  rule.points.reserve(subdomain_count(kind) * q * q * q * q);
  // The maps below are written in coordinates of {0 <= s2 <= s1 <= 1};
  // (u, v) = (s1 - s2, s2) is a unit-Jacobian map onto the simplex.
  auto push = [&](double x1, double x2, double y1, double y2, double w) {
    rule.points.push_back({x1 - x2, x2, y1 - y2, y2, w});
  };
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int c = 0; c < q; ++c)
        for (int d = 0; d < q; ++d) {
          const double xi = g.points[a];
          const double e1 = g.points[b];
          const double e2 = g.points[c];
          const double e3 = g.points[d];
          const double w0 = g.weights[a] * g.weights[b] * g.weights[c] *
                            g.weights[d] * xi * xi * xi;
          switch (kind) {
          case PairCase::identical: {
            const double w = w0 * e1 * e1 * e2;
            const double e12 = e1 * e2, e123 = e1 * e2 * e3;
            push(xi, xi * (1 - e1 + e12), xi * (1 - e123), xi * (1 - e1), w);
            push(xi * (1 - e123), xi * (1 - e1), xi, xi * (1 - e1 + e12), w);
            push(xi, xi * e1 * (1 - e2 + e2 * e3), xi * (1 - e12),
                 xi * e1 * (1 - e2), w);
            push(xi * (1 - e12), xi * e1 * (1 - e2), xi,
                 xi * e1 * (1 - e2 + e2 * e3), w);
            push(xi * (1 - e123), xi * e1 * (1 - e2 * e3), xi,
                 xi * e1 * (1 - e2), w);
            push(xi, xi * e1 * (1 - e2), xi * (1 - e123),
                 xi * e1 * (1 - e2 * e3), w);
            break;
          }
          case PairCase::shared_edge: {
            const double wa = w0 * e1 * e1;
            const double wb = wa * e2;
            const double e12 = e1 * e2, e123 = e1 * e2 * e3;
            push(xi, xi * e1 * e3, xi * (1 - e12), xi * e1 * (1 - e2), wa);
            push(xi, xi * e1, xi * (1 - e123), xi * e12 * (1 - e3), wb);
            push(xi * (1 - e12), xi * e1 * (1 - e2), xi, xi * e123, wb);
            push(xi * (1 - e123), xi * e12 * (1 - e3), xi, xi * e1, wb);
            push(xi * (1 - e123), xi * e1 * (1 - e2 * e3), xi, xi * e12, wb);
            break;
          }
          case PairCase::shared_vertex: {
            const double w = w0 * e2;
            push(xi, xi * e1, xi * e2, xi * e2 * e3, w);
            push(xi * e2, xi * e2 * e1, xi, xi * e3, w);
            break;
          }
          case PairCase::disjoint: break;
          }
        }
  return rule;
}

/// Process-wide cache of panel-pair rules; returned references stay valid.
inline const PanelPairRule &cached_pair_rule(PairCase kind, int q) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PanelPairRule> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(static_cast<int>(kind), q);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, sauter_schwab_rule(kind, q)).first;
  return it->second;
}

/// Local corner orders of two panels placing shared vertices first, as the
/// singular rules expect.  order[k] is the original corner stored at
/// position k.
struct PanelPairing {
  PairCase kind;
  std::array<int, 3> order_a{0, 1, 2};
  std::array<int, 3> order_b{0, 1, 2};
};

inline PanelPairing pair_panels(const Triangle &a, const Triangle &b) {
  PanelPairing p{classify_panel_pair(a, b)};
  switch (p.kind) {
  case PairCase::identical: {
    // Same vertex set; align b's corners with a's.
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        if (b[l] == a[k]) p.order_b[k] = l;
    break;
  }
  case PairCase::shared_edge: {
    int ka[2], kb[2], n = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (a[i] == b[j]) ka[n] = i, kb[n] = j, ++n;
    p.order_a = {ka[0], ka[1], 3 - ka[0] - ka[1]};
    p.order_b = {kb[0], kb[1], 3 - kb[0] - kb[1]};
    break;
  }
  case PairCase::shared_vertex: {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (a[i] == b[j]) {
          p.order_a = {i, (i + 1) % 3, (i + 2) % 3};
          p.order_b = {j, (j + 1) % 3, (j + 2) % 3};
        }
    break;
  }
  case PairCase::disjoint: break;
  }
  return p;
}

} // namespace fastbem
