#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace forchheimer {

/// Triangle rule in barycentric coordinates; weights sum to 1 and are scaled
/// by the element area at use.
struct TriangleQuadrature {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree;
};

/// Edge rule on the parameter interval [0, 1]; weights sum to 1.
struct EdgeQuadrature {
  std::vector<double> points;
  std::vector<double> weights;
  int degree;
};

/// Six-point symmetric rule exact through degree 4 (Dunavant).
inline const TriangleQuadrature& triangle_rule_degree4() {
  static const TriangleQuadrature rule = [] {
    constexpr double a1 = 0.445948490915964886318329253883;
    constexpr double w1 = 0.223381589678011465944827974606;
    constexpr double a2 = 0.091576213509770743459571463402;
    constexpr double w2 = 0.109951743655321867388505358726;
    TriangleQuadrature r;
    r.degree = 4;
    r.points = {{a1, a1, 1.0 - 2.0 * a1}, {a1, 1.0 - 2.0 * a1, a1}, {1.0 - 2.0 * a1, a1, a1},
                {a2, a2, 1.0 - 2.0 * a2}, {a2, 1.0 - 2.0 * a2, a2}, {1.0 - 2.0 * a2, a2, a2}};
    r.weights = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

/// Three-point Gauss-Legendre, exact through degree 5.
inline const EdgeQuadrature& edge_rule_gauss3() {
  static const EdgeQuadrature rule = [] {
    const double d = 0.5 * std::sqrt(0.6);
    EdgeQuadrature r;
    r.degree = 5;
    r.points = {0.5 - d, 0.5, 0.5 + d};
    r.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    return r;
  }();
  return rule;
}

/// n-point Gauss-Legendre rule on [0, 1] (Newton iteration on P_n).
inline EdgeQuadrature gauss_legendre(int n) {
  EdgeQuadrature r;
  r.degree = 2 * n - 1;
  r.points.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    r.points[lo] = 0.5 * (1.0 - x);
    r.points[hi] = 0.5 * (1.0 + x);
    r.weights[lo] = 0.5 * w;
    r.weights[hi] = 0.5 * w;
  }
  return r;
}

}  // namespace forchheimer
