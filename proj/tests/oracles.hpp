#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's quadrature, basis or assembly code.

#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "forchheimer/constitutive.hpp"
#include "forchheimer/mesh.hpp"

namespace oracle {

using forchheimer::Vec2;

/// s g(s) summed straight from the coefficient/exponent lists.
inline double s_times_g(std::span<const double> exps, std::span<const double> coeffs, double s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    sum += coeffs[i] * (exps[i] == 0.0 ? s : std::pow(s, 1.0 + exps[i]));
  }
  return sum;
}

/// Plain bisection for s g(s) = xi on [0, hi].
inline double bisect_root(const forchheimer::ForchheimerPolynomial& p, double xi, double hi) {
  double lo = 0.0;
  for (int it = 0; it < 400 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (s_times_g(p.exponents(), p.coefficients(), mid) < xi) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double bisect_conductivity(const forchheimer::ForchheimerPolynomial& p, double xi) {
  const double s = bisect_root(p, xi, xi / p.coefficients().front() + 1.0);
  return xi == 0.0 ? 1.0 / p.coefficients().front()
                   : s / xi;  // K = 1/g(s) = s / (s g(s))
}

/// Adaptive Simpson with Richardson correction.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 50) {
  struct Rec {
    const std::function<double(double)>& f;
    double run(double a, double b, double fa, double fm, double fb, double whole, double tol,
               int depth) const {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
      return run(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             run(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  } rec{f};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec.run(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Composite trapezoid, doubled until successive values agree to rel_tol.
inline double refined_trapezoid(const std::function<double(double)>& f, double a, double b,
                                double rel_tol) {
  std::size_t n = 1;
  double h = b - a;
  double sum = 0.5 * (f(a) + f(b));
  double prev = sum * h;
  for (int level = 0; level < 30; ++level) {
    double mid = 0.0;
    for (std::size_t k = 0; k < n; ++k) mid += f(a + (static_cast<double>(k) + 0.5) * h);
    sum += mid;
    n *= 2;
    h *= 0.5;
    const double cur = sum * h;
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle
/// {(0,0),(1,0),(0,1)}; exact for polynomials of degree <= 2*20-2.
struct DenseTriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;  // sum to 1/2
  DenseTriangleRule() {
    using G = boost::math::quadrature::gauss<double, 20>;
    std::vector<double> x, w;
    // boost stores the non-negative abscissae of the [-1,1] rule.
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    for (std::size_t i = 0; i < ab.size(); ++i) {
      x.push_back(0.5 * (1.0 + ab[i]));
      w.push_back(0.5 * wt[i]);
      if (ab[i] != 0.0) {
        x.push_back(0.5 * (1.0 - ab[i]));
        w.push_back(0.5 * wt[i]);
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double u = x[i], v = x[j];
        points.push_back({u, v * (1.0 - u)});
        weights.push_back(w[i] * w[j] * (1.0 - u));
      }
    }
  }
};

/// Barycentric coordinates of p with respect to triangle (a, b, c).
inline std::array<double, 3> barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  const double l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
  const double l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
  return {1.0 - l1 - l2, l1, l2};
}

/// Gradients of the barycentric hats of triangle (a, b, c), from the
/// classic edge-normal formula grad(lambda_i) = perp(edge opposite i) / (2 area).
inline std::array<Vec2, 3> hat_gradients(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  return {Vec2{(b[1] - c[1]) / det, (c[0] - b[0]) / det},
          Vec2{(c[1] - a[1]) / det, (a[0] - c[0]) / det},
          Vec2{(a[1] - b[1]) / det, (b[0] - a[0]) / det}};
}

/// Locates the triangle of build_unit_square(n) that contains p.
inline std::size_t locate(const forchheimer::TriangleMesh& mesh, const Vec2& p) {
  const std::size_t n = mesh.subdivisions;
  auto cell = [n](double x) {
    return std::min(n - 1, static_cast<std::size_t>(std::floor(x * static_cast<double>(n))));
  };
  const std::size_t i = cell(p[0]), j = cell(p[1]);
  const double lx = p[0] * static_cast<double>(n) - static_cast<double>(i);
  const double ly = p[1] * static_cast<double>(n) - static_cast<double>(j);
  return 2 * (j * n + i) + (ly > lx ? 1 : 0);
}

}  // namespace oracle
