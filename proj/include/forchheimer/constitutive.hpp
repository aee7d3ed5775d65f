#pragma once

/// \file
/// Generalized Forchheimer polynomials g(s) = sum_i a_i s^{alpha_i} and the
/// conductivity K(xi) = 1/g(s(xi)) they induce through s g(s) = xi.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace forchheimer {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Degeneracy exponents derived from the degree of g.
struct DegeneracyExponents {
  double a;       ///< deg g / (deg g + 1), in (0, 1)
  double beta;    ///< 2 - a, in (1, 2)
  double lambda;  ///< beta / (beta - 1), in (2, inf)
};

/// Value of the flux map y -> K(|y|) y and its Jacobian.
struct FluxEvaluation {
  Vec2 value;
  Mat2 jacobian;
};

class ForchheimerPolynomial {
 public:
  ForchheimerPolynomial(std::vector<double> exponents,
                        std::vector<double> coefficients)
      : exponents_(std::move(exponents)),
        coefficients_(std::move(coefficients)) {
    if (exponents_.size() != coefficients_.size()) {
      throw std::invalid_argument(
          "ForchheimerPolynomial: exponents and coefficients differ in length");
    }
    if (exponents_.size() < 2) {
      throw std::invalid_argument(
          "ForchheimerPolynomial: at least two terms are required (N >= 1)");
    }
    if (exponents_.front() != 0.0) {
      throw std::invalid_argument(
          "ForchheimerPolynomial: the leading exponent must be 0");
    }
    for (std::size_t i = 1; i < exponents_.size(); ++i) {
      if (!(exponents_[i] > exponents_[i - 1]) || !std::isfinite(exponents_[i])) {
        throw std::invalid_argument(
            "ForchheimerPolynomial: exponents must be strictly increasing");
      }
    }
    if (!(coefficients_.front() > 0.0) || !(coefficients_.back() > 0.0)) {
      throw std::invalid_argument(
          "ForchheimerPolynomial: a_0 and a_N must be positive");
    }
    for (std::size_t i = 1; i + 1 < coefficients_.size(); ++i) {
      if (!(coefficients_[i] >= 0.0)) {
        throw std::invalid_argument(
            "ForchheimerPolynomial: intermediate coefficients must be >= 0");
      }
    }
    for (double c : coefficients_) {
      if (!std::isfinite(c)) {
        throw std::invalid_argument(
            "ForchheimerPolynomial: coefficients must be finite");
      }
    }

    const double deg = exponents_.back();
    degeneracy_.a = deg / (deg + 1.0);
    degeneracy_.beta = 2.0 - degeneracy_.a;
    degeneracy_.lambda = degeneracy_.beta / (degeneracy_.beta - 1.0);

    chi_ = std::max(1.0 / coefficients_.front(), 1.0 / coefficients_.back());
    for (double c : coefficients_) chi_ = std::max(chi_, c);

    two_term_ = exponents_.size() == 2 && exponents_[1] == 1.0;
  }

  /// The two-term Darcy-Forchheimer law g(s) = a0 + a1 s.
  static ForchheimerPolynomial two_term(double a0, double a1) {
    return ForchheimerPolynomial({0.0, 1.0}, {a0, a1});
  }

  std::span<const double> exponents() const { return exponents_; }
  std::span<const double> coefficients() const { return coefficients_; }
  /// Number of terms minus one.
  std::size_t order() const { return exponents_.size() - 1; }
  const DegeneracyExponents& degeneracy() const { return degeneracy_; }
  /// max{a_0, ..., a_N, 1/a_0, 1/a_N}
  double chi() const { return chi_; }

  /// Bound constant d(a) = N / min{a_0, (1 + alpha_N) a_N} of the coefficient
  /// sensitivity of K.
  double sensitivity_bound() const {
    const double denom = std::min(coefficients_.front(),
                                  (1.0 + exponents_.back()) * coefficients_.back());
    return static_cast<double>(order()) / denom;
  }

  /// Copy with coefficient `i` replaced.
  ForchheimerPolynomial with_coefficient(std::size_t i, double value) const {
    auto coeffs = coefficients_;
    coeffs.at(i) = value;
    return ForchheimerPolynomial(exponents_, std::move(coeffs));
  }

  double g(double s) const {
    check_nonnegative(s, "g");
    double sum = coefficients_.front();
    for (std::size_t i = 1; i < exponents_.size(); ++i) {
      sum += coefficients_[i] * std::pow(s, exponents_[i]);
    }
    return sum;
  }

  /// s g'(s) = sum_i a_i alpha_i s^{alpha_i}; finite at s = 0 for any
  /// exponents, unlike g'(0).
  double s_times_g_prime(double s) const {
    check_nonnegative(s, "s_times_g_prime");
    double sum = 0.0;
    for (std::size_t i = 1; i < exponents_.size(); ++i) {
      sum += coefficients_[i] * exponents_[i] * std::pow(s, exponents_[i]);
    }
    return sum;
  }

  double g_prime(double s) const {
    check_nonnegative(s, "g_prime");
    double sum = 0.0;
    for (std::size_t i = 1; i < exponents_.size(); ++i) {
      const double e = exponents_[i];
      if (s == 0.0) {
        if (e < 1.0) {
          if (coefficients_[i] > 0.0) return std::numeric_limits<double>::infinity();
        } else if (e == 1.0) {
          sum += coefficients_[i];
        }
        continue;
      }
      sum += coefficients_[i] * e * std::pow(s, e - 1.0);
    }
    return sum;
  }

  /// Unique s >= 0 with s g(s) = xi.
  double solve_s(double xi) const {
    check_nonnegative(xi, "solve_s");
    if (xi == 0.0) return 0.0;
    if (two_term_) {
      // Rationalized root of a1 s^2 + a0 s - xi = 0.
      const double a0 = coefficients_[0];
      const double a1 = coefficients_[1];
      return 2.0 * xi / (a0 + std::sqrt(a0 * a0 + 4.0 * a1 * xi));
    }

    // Each term alone bounds the root from above: s g(s) >= a_i s^{1+alpha_i}.
    double hi = xi / coefficients_.front();
    for (std::size_t i = 1; i < exponents_.size(); ++i) {
      if (coefficients_[i] > 0.0) {
        hi = std::min(hi, std::pow(xi / coefficients_[i], 1.0 / (1.0 + exponents_[i])));
      }
    }
    double lo = 0.0;
    const double tol = 1e-14 * (1.0 + xi);
    // s g(s) is convex and increasing, so Newton from the upper end of the
    // bracket decreases monotonically onto the root; bisection guards
    // against round-off stalls.
    double s = hi;
    constexpr int kMaxIterations = 200;
    for (int it = 0; it < kMaxIterations; ++it) {
      const double gs = g(s);
      const double r = s * gs - xi;
      if (std::abs(r) <= tol) return s;
      if (r > 0.0) hi = s; else lo = s;
      const double slope = gs + s_times_g_prime(s);
      double next = s - r / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == s || hi - lo <= std::numeric_limits<double>::epsilon() * hi) {
        return next;
      }
      s = next;
    }
    throw std::runtime_error("solve_s: root iteration did not converge");
  }

  /// K(xi) = 1 / g(s(xi)).
  double conductivity(double xi) const { return 1.0 / g(solve_s(xi)); }

  /// K'(xi) * xi, which stays finite at xi = 0 even when K'(0) does not.
  double conductivity_derivative_times_xi(double xi) const {
    const double s = solve_s(xi);
    const double gs = g(s);
    const double sgp = s_times_g_prime(s);
    return -(sgp / (gs + sgp)) / gs;
  }

  /// K'(xi) from implicit differentiation of s g(s) = xi:
  /// K' = -g'(s) / (g(s)^2 (g(s) + s g'(s))).
  double conductivity_derivative(double xi) const {
    check_nonnegative(xi, "conductivity_derivative");
    if (xi == 0.0) {
      const double g0 = coefficients_.front();
      return -g_prime(0.0) / (g0 * g0 * g0);
    }
    return conductivity_derivative_times_xi(xi) / xi;
  }

  /// H(xi) = int_0^{xi^2} K(sqrt(u)) du. Substituting u = (s g(s))^2 gives
  /// H = sum_i 2 a_i (1 + alpha_i) / (2 + alpha_i) s(xi)^{2 + alpha_i}.
  double conductivity_integral(double xi) const {
    const double s = solve_s(xi);
    if (s == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      const double e = exponents_[i];
      sum += 2.0 * coefficients_[i] * (1.0 + e) / (2.0 + e) * std::pow(s, 2.0 + e);
    }
    return sum;
  }

  /// dK/da_i = -K s^{alpha_i} / (g + s g'), for i = 0..N.
  std::vector<double> conductivity_coefficient_gradient(double xi) const {
    const double s = solve_s(xi);
    const double gs = g(s);
    const double denom = gs + s_times_g_prime(s);
    const double k = 1.0 / gs;
    std::vector<double> grad(exponents_.size());
    grad[0] = -k / denom;
    for (std::size_t i = 1; i < exponents_.size(); ++i) {
      grad[i] = -k * std::pow(s, exponents_[i]) / denom;
    }
    return grad;
  }

  /// Flux K(|y|) y and Jacobian K I + K'(|y|) |y| (y/|y|) (y/|y|)^T, with
  /// the y -> 0 limit K(0) I.
  FluxEvaluation flux(const Vec2& y) const {
    const double norm = std::hypot(y[0], y[1]);
    FluxEvaluation out{};
    if (norm == 0.0) {
      const double k0 = 1.0 / coefficients_.front();
      out.jacobian = {{{k0, 0.0}, {0.0, k0}}};
      return out;
    }
    const double s = solve_s(norm);
    const double gs = g(s);
    const double sgp = s_times_g_prime(s);
    const double k = 1.0 / gs;
    const double kp_xi = -(sgp / (gs + sgp)) * k;
    const Vec2 unit{y[0] / norm, y[1] / norm};
    out.value = {k * y[0], k * y[1]};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        out.jacobian[r][c] = kp_xi * unit[r] * unit[c] + (r == c ? k : 0.0);
      }
    }
    return out;
  }

 private:
  static void check_nonnegative(double v, const char* what) {
    if (!(v >= 0.0)) {
      throw std::domain_error(std::string(what) + ": argument must be >= 0, got " +
                              std::to_string(v));
    }
  }

  std::vector<double> exponents_;
  std::vector<double> coefficients_;
  DegeneracyExponents degeneracy_{};
  double chi_ = 1.0;
  bool two_term_ = false;
};

}  // namespace forchheimer
