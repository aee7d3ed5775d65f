#pragma once

/// \file
/// Manufactured solutions on the unit square for the two-term law
/// g(s) = 1 + a1 s, for which K(xi) = 2 / (1 + sqrt(1 + 4 a1 xi)).
///
///   Example 1: rho = e^{-2t} (x1 + x2), m constant in space.
///   Example 2: rho = e^{-t} |x|^2, m radial.
///
/// Variant A uses a1 = 1, variant B uses a1 = 0.95. The boundary flux is
/// always m_exact . nu, and f is the closed-form divergence.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "forchheimer/constitutive.hpp"
#include "forchheimer/mesh.hpp"
#include "forchheimer/system.hpp"

namespace forchheimer {

struct ManufacturedCase {
  std::string id;
  ForchheimerPolynomial poly;
  std::function<double(const Vec2&, double)> rho_exact;
  std::function<Vec2(const Vec2&, double)> m_exact;
  std::function<double(const Vec2&, double)> source;
  double final_time = 1.0;

  double rho0(const Vec2& x) const { return rho_exact(x, 0.0); }
  double porosity(const Vec2&) const { return 1.0; }
  double psi(const Vec2& x, double t, Side side) const {
    const Vec2 m = m_exact(x, t);
    const Vec2 nu = outward_normal(side);
    return m[0] * nu[0] + m[1] * nu[1];
  }

  ProblemData problem() const {
    ProblemData data{poly};
    data.porosity = [](const Vec2&) { return 1.0; };
    data.source = source;
    data.boundary_flux = [m = m_exact](const Vec2& x, double t, Side side) {
      const Vec2 v = m(x, t);
      const Vec2 nu = outward_normal(side);
      return v[0] * nu[0] + v[1] * nu[1];
    };
    data.initial_density = [rho = rho_exact](const Vec2& x) { return rho(x, 0.0); };
    return data;
  }
};

/// Example 1 with g(s) = 1 + a1 s.
inline ManufacturedCase example1(double a1, std::string id) {
  ManufacturedCase c{std::move(id), ForchheimerPolynomial::two_term(1.0, a1), {}, {}, {}, 1.0};
  c.rho_exact = [](const Vec2& x, double t) { return std::exp(-2.0 * t) * (x[0] + x[1]); };
  c.m_exact = [a1](const Vec2&, double t) {
    const double e = std::exp(-2.0 * t);
    const double v = -2.0 * e / (1.0 + std::sqrt(1.0 + 4.0 * a1 * std::sqrt(2.0) * e));
    return Vec2{v, v};
  };
  c.source = [](const Vec2& x, double t) { return -2.0 * std::exp(-2.0 * t) * (x[0] + x[1]); };
  return c;
}

/// Example 2 with g(s) = 1 + a1 s. The source's middle term carries w^2 / w
/// in closed form; it is written with w alone, so the origin is not 0/0.
inline ManufacturedCase example2(double a1, std::string id) {
  ManufacturedCase c{std::move(id), ForchheimerPolynomial::two_term(1.0, a1), {}, {}, {}, 1.0};
  c.rho_exact = [](const Vec2& x, double t) {
    return std::exp(-t) * (x[0] * x[0] + x[1] * x[1]);
  };
  c.m_exact = [a1](const Vec2& x, double t) {
    const double e = std::exp(-t);
    const double w = std::hypot(x[0], x[1]);
    const double q = -4.0 * e / (1.0 + std::sqrt(1.0 + 8.0 * a1 * e * w));
    return Vec2{q * x[0], q * x[1]};
  };
  c.source = [a1](const Vec2& x, double t) {
    const double e = std::exp(-t);
    const double w = std::hypot(x[0], x[1]);
    const double root = std::sqrt(1.0 + 8.0 * a1 * e * w);
    return -e * w * w + 16.0 * a1 * e * e * w / (root * (1.0 + root) * (1.0 + root)) -
           8.0 * e / (1.0 + root);
  };
  return c;
}

inline double variant_coefficient(char variant) {
  switch (variant) {
    case 'A': return 1.0;
    case 'B': return 0.95;
  }
  throw std::invalid_argument(std::string("unknown variant '") + variant + "'");
}

inline ManufacturedCase find_case(int example, char variant) {
  const double a1 = variant_coefficient(variant);
  const std::string id = std::to_string(example) + variant;
  switch (example) {
    case 1: return example1(a1, id);
    case 2: return example2(a1, id);
  }
  throw std::invalid_argument("unknown example " + std::to_string(example));
}

inline std::vector<ManufacturedCase> case_catalog() {
  return {find_case(1, 'A'), find_case(1, 'B'), find_case(2, 'A'), find_case(2, 'B')};
}

struct ConsistencyReport {
  double max_flux_residual = 0.0;
  double max_continuity_residual = 0.0;
};

/// Checks m = -K(|grad rho|) grad rho and rho_t + div m = f at random
/// interior points by central differences of the exact fields.
inline ConsistencyReport consistency_check(const ManufacturedCase& c, std::size_t samples,
                                           double step, std::uint64_t seed = 1) {
  if (!(step > 0.0 && step <= 1e-3)) {
    throw std::invalid_argument("consistency_check: step must lie in (0, 1e-3]");
  }
  std::mt19937_64 rng(seed);
  // Keep a margin from the corner so the radial case stays smooth.
  std::uniform_real_distribution<double> space(0.05, 0.95);
  std::uniform_real_distribution<double> time(0.05, 0.95 * c.final_time);
  ConsistencyReport report;
  const double h = step;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec2 x{space(rng), space(rng)};
    const double t = time(rng);
    const Vec2 grad{(c.rho_exact({x[0] + h, x[1]}, t) - c.rho_exact({x[0] - h, x[1]}, t)) / (2 * h),
                    (c.rho_exact({x[0], x[1] + h}, t) - c.rho_exact({x[0], x[1] - h}, t)) / (2 * h)};
    const double k_val = c.poly.conductivity(std::hypot(grad[0], grad[1]));
    const Vec2 m = c.m_exact(x, t);
    report.max_flux_residual =
        std::max(report.max_flux_residual, std::hypot(m[0] + k_val * grad[0], m[1] + k_val * grad[1]));

    const double rho_t = (c.rho_exact(x, t + h) - c.rho_exact(x, t - h)) / (2 * h);
    const double div = (c.m_exact({x[0] + h, x[1]}, t)[0] - c.m_exact({x[0] - h, x[1]}, t)[0] +
                        c.m_exact({x[0], x[1] + h}, t)[1] - c.m_exact({x[0], x[1] - h}, t)[1]) /
                       (2 * h);
    report.max_continuity_residual =
        std::max(report.max_continuity_residual, std::abs(rho_t + div - c.source(x, t)));
  }
  return report;
}

}  // namespace forchheimer
