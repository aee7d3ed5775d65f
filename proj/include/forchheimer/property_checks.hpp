#pragma once

/// \file
/// Sampled checks of the structural inequalities satisfied by K for any
/// Forchheimer polynomial. Used by the `properties` command and the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "forchheimer/constitutive.hpp"
#include "forchheimer/quadrature.hpp"

namespace forchheimer {

struct PropertyResult {
  std::string name;
  bool passed = true;
  /// Worst observed violation (<= 0 when passing) or a summary statistic.
  std::string detail;
};

struct PropertySampling {
  std::size_t xi_samples = 10000;
  double xi_max = 1e6;
  std::size_t vector_pairs = 1000;
  double vector_box = 10.0;
  int segment_points = 64;
  /// Allowance for quadrature error in the vector inequalities.
  double quadrature_slack = 1e-6;
  std::uint64_t seed = 20240607;
};

/// xi = 0 followed by log-spaced points up to xi_max.
inline std::vector<double> sample_xi(std::size_t count, double xi_max) {
  std::vector<double> xs;
  xs.reserve(count);
  xs.push_back(0.0);
  if (count < 2) return xs;
  const double lo = std::log10(xi_max) - 14.0;
  const double hi = std::log10(xi_max);
  for (std::size_t k = 1; k < count; ++k) {
    const double f = static_cast<double>(k - 1) / static_cast<double>(count - 2 > 0 ? count - 2 : 1);
    xs.push_back(std::pow(10.0, lo + f * (hi - lo)));
  }
  xs.back() = xi_max;
  return xs;
}

/// Random member of FP(N, alpha) with N <= max_order and alpha_N <= max_degree.
inline ForchheimerPolynomial random_polynomial(std::mt19937_64& rng, std::size_t max_order = 3,
                                               double max_degree = 3.0) {
  std::uniform_int_distribution<std::size_t> order_dist(1, max_order);
  std::uniform_real_distribution<double> exp_dist(0.05, max_degree);
  std::uniform_real_distribution<double> log_coeff(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t order = order_dist(rng);
  std::vector<double> exps;
  while (exps.size() < order) {
    const double e = exp_dist(rng);
    if (std::none_of(exps.begin(), exps.end(), [e](double x) { return std::abs(x - e) < 1e-3; })) {
      exps.push_back(e);
    }
  }
  std::sort(exps.begin(), exps.end());
  exps.insert(exps.begin(), 0.0);
  std::vector<double> coeffs(order + 1);
  for (std::size_t i = 0; i <= order; ++i) {
    const bool interior = i > 0 && i < order;
    coeffs[i] = (interior && unit(rng) < 0.3) ? 0.0 : std::exp(log_coeff(rng));
  }
  return ForchheimerPolynomial(std::move(exps), std::move(coeffs));
}

namespace detail {
inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

/// Accumulates the largest violation of `lhs <= rhs`, relative to `scale`.
struct Violation {
  double worst = -std::numeric_limits<double>::infinity();
  void check_le(double lhs, double rhs, double scale) {
    worst = std::max(worst, (lhs - rhs) / std::max(scale, std::numeric_limits<double>::min()));
  }
  PropertyResult result(std::string name, double tol) const {
    return {std::move(name), worst <= tol, "max relative violation " + format_double(worst)};
  }
};
}  // namespace detail

/// Scalar properties of K over sampled xi.
inline std::vector<PropertyResult> check_scalar_properties(const ForchheimerPolynomial& poly,
                                                           const PropertySampling& cfg = {}) {
  constexpr double kRoundoff = 1e-12;
  const auto xs = sample_xi(cfg.xi_samples, cfg.xi_max);
  const double a = poly.degeneracy().a;
  const double k0 = 1.0 / poly.coefficients().front();
  const double d = poly.sensitivity_bound();

  detail::Violation bounds, monotone, kxi1, kxi2, deriv_lo, deriv_hi, round_trip, h_lo, h_hi, sens;
  double env_min = std::numeric_limits<double>::infinity();
  double env_max = 0.0;
  double prev_k = 0.0, prev_kxi = 0.0, prev_kxi2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double xi = xs[i];
    const double s = poly.solve_s(xi);
    const double k = poly.conductivity(xi);
    const double kpxi = poly.conductivity_derivative_times_xi(xi);
    const double h = poly.conductivity_integral(xi);

    bounds.check_le(k, k0, k0);
    bounds.check_le(0.0, k, k0);
    if (!(k > 0.0)) bounds.worst = std::max(bounds.worst, 1.0);
    if (i > 0) {
      monotone.check_le(k, prev_k, prev_k);
      kxi1.check_le(prev_kxi, k * xi, k * xi);
      kxi2.check_le(prev_kxi2, k * xi * xi, k * xi * xi);
    }
    prev_k = k;
    prev_kxi = k * xi;
    prev_kxi2 = k * xi * xi;

    deriv_lo.check_le(-a * k, kpxi, k);
    deriv_hi.check_le(kpxi, 0.0, k);
    round_trip.check_le(std::abs(s * poly.g(s) - xi), 0.0, 1.0 + xi);

    const double kx2 = k * xi * xi;
    h_lo.check_le(kx2, h, std::max(h, 1e-300));
    h_hi.check_le(h, 2.0 * kx2, std::max(h, 1e-300));

    const double env = k * std::pow(1.0 + xi, a);
    env_min = std::min(env_min, env);
    env_max = std::max(env_max, env);

    double total = 0.0;
    for (double g : poly.conductivity_coefficient_gradient(xi)) total += std::abs(g);
    sens.check_le(total, d * k, d * k);
  }

  std::vector<PropertyResult> out;
  out.push_back(bounds.result("K in (0, 1/a0]", kRoundoff));
  out.push_back(monotone.result("K nonincreasing", kRoundoff));
  out.push_back(kxi1.result("K(xi) xi nondecreasing", kRoundoff));
  out.push_back(kxi2.result("K(xi) xi^2 nondecreasing", kRoundoff));
  out.push_back(deriv_lo.result("-a K <= K' xi", kRoundoff));
  out.push_back(deriv_hi.result("K' xi <= 0", kRoundoff));
  // Scaled by (1 + xi), so this is exactly |s g(s) - xi| <= 1e-12 (1 + xi).
  out.push_back(round_trip.result("s g(s) = xi round trip", kRoundoff));
  out.push_back(h_lo.result("K xi^2 <= H", kRoundoff));
  out.push_back(h_hi.result("H <= 2 K xi^2", kRoundoff));
  out.push_back({"K (1+xi)^a bounded above and below",
                 env_min > 0.0 && std::isfinite(env_max),
                 "min " + detail::format_double(env_min) + ", max " + detail::format_double(env_max)});
  out.push_back(sens.result("sum |dK/da_i| <= d(a) K", kRoundoff));
  return out;
}

/// Quadrature of int_0^1 K(|t y + (1 - t) y'|) dt.
inline double segment_conductivity(const ForchheimerPolynomial& poly, const Vec2& y,
                                   const Vec2& yp, const EdgeQuadrature& rule) {
  double q = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const double t = rule.points[i];
    q += rule.weights[i] *
         poly.conductivity(std::hypot(t * y[0] + (1 - t) * yp[0], t * y[1] + (1 - t) * yp[1]));
  }
  return q;
}

/// Monotonicity and Lipschitz inequalities of y -> K(|y|) y on random pairs.
inline std::vector<PropertyResult> check_vector_properties(const ForchheimerPolynomial& poly,
                                                           const PropertySampling& cfg = {}) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> box(-cfg.vector_box, cfg.vector_box);
  const auto rule = gauss_legendre(cfg.segment_points);
  const double a = poly.degeneracy().a;
  detail::Violation mono, lip;
  for (std::size_t k = 0; k < cfg.vector_pairs; ++k) {
    const Vec2 y{box(rng), box(rng)};
    const Vec2 yp{box(rng), box(rng)};
    const auto f = poly.flux(y).value;
    const auto fp = poly.flux(yp).value;
    const Vec2 dy{yp[0] - y[0], yp[1] - y[1]};
    const Vec2 df{fp[0] - f[0], fp[1] - f[1]};
    const double dist2 = dy[0] * dy[0] + dy[1] * dy[1];
    if (dist2 == 0.0) continue;
    const double q = segment_conductivity(poly, y, yp, rule);
    const double mono_rhs = (1.0 - a) * dist2 * q;
    mono.check_le(mono_rhs, df[0] * dy[0] + df[1] * dy[1], mono_rhs);
    const double lip_rhs = (1.0 + a) * std::sqrt(dist2) * q;
    lip.check_le(std::hypot(df[0], df[1]), lip_rhs, lip_rhs);
  }
  return {mono.result("(F(y') - F(y)).(y' - y) >= (1-a)|y'-y|^2 Q", cfg.quadrature_slack),
          lip.result("|F(y') - F(y)| <= (1+a)|y'-y| Q", cfg.quadrature_slack)};
}

/// Polynomials exercised by the `properties` command: the two two-term laws
/// of the experiments and `random_count` random members of FP(N, alpha).
inline std::vector<ForchheimerPolynomial> property_polynomials(std::size_t random_count,
                                                               std::uint64_t seed) {
  std::vector<ForchheimerPolynomial> polys{ForchheimerPolynomial::two_term(1.0, 1.0),
                                           ForchheimerPolynomial::two_term(1.0, 0.95)};
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < random_count; ++i) polys.push_back(random_polynomial(rng));
  return polys;
}

inline std::string describe(const ForchheimerPolynomial& poly) {
  std::ostringstream os;
  os.precision(4);
  for (std::size_t i = 0; i < poly.exponents().size(); ++i) {
    if (i) os << " + ";
    os << poly.coefficients()[i];
    if (i) os << " s^" << poly.exponents()[i];
  }
  return os.str();
}

}  // namespace forchheimer
