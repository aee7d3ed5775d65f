#pragma once

/// \file
/// Error norms and refinement studies.

#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "forchheimer/femspace.hpp"
#include "forchheimer/manufactured.hpp"
#include "forchheimer/system.hpp"

namespace forchheimer {

/// L2 distance between a P1 field and an exact function of (x, t), by the
/// degree-4 rule on every triangle.
template <class Exact>
double l2_error(const ScalarField& field, const Exact& exact, double t) {
  const auto& rule = triangle_rule_degree4();
  const auto& space = field.space;
  double sum = 0.0;
  for (std::size_t e = 0; e < space.mesh().num_triangles(); ++e) {
    const auto& geo = space.geometry(e);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& b = rule.points[q];
      const double d = eval_field(field, e, {b[1], b[2]}) - exact(barycentric_to_physical(geo, b), t);
      sum += rule.weights[q] * geo.area * d * d;
    }
  }
  return std::sqrt(sum);
}

template <class Exact>
double l2_error(const VectorField& field, const Exact& exact, double t) {
  const auto& rule = triangle_rule_degree4();
  const auto& scalar = field.space.scalar();
  double sum = 0.0;
  for (std::size_t e = 0; e < scalar.mesh().num_triangles(); ++e) {
    const auto& geo = scalar.geometry(e);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& b = rule.points[q];
      const Vec2 v = eval_field(field, e, {b[1], b[2]});
      const Vec2 ex = exact(barycentric_to_physical(geo, b), t);
      sum += rule.weights[q] * geo.area * ((v[0] - ex[0]) * (v[0] - ex[0]) + (v[1] - ex[1]) * (v[1] - ex[1]));
    }
  }
  return std::sqrt(sum);
}

inline double l2_norm(const ScalarField& field) {
  return l2_error(field, [](const Vec2&, double) { return 0.0; }, 0.0);
}

inline double l2_norm(const VectorField& field) {
  return l2_error(field, [](const Vec2&, double) { return Vec2{0.0, 0.0}; }, 0.0);
}

/// (int |grad rho_h - grad rho|^p)^{1/p} with the exact gradient supplied.
template <class ExactGradient>
double gradient_lp_error(const ScalarField& field, const ExactGradient& exact_grad, double t,
                         double p) {
  const auto& rule = triangle_rule_degree4();
  const auto& space = field.space;
  double sum = 0.0;
  for (std::size_t e = 0; e < space.mesh().num_triangles(); ++e) {
    const auto& geo = space.geometry(e);
    const Vec2 g = eval_gradient(field, e);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Vec2 ex = exact_grad(barycentric_to_physical(geo, rule.points[q]), t);
      sum += rule.weights[q] * geo.area * std::pow(std::hypot(g[0] - ex[0], g[1] - ex[1]), p);
    }
  }
  return std::pow(sum, 1.0 / p);
}

/// How the time step follows the mesh: dt = T / n, or a fixed dt that must
/// divide T into a whole number of steps.
struct DtRule {
  enum class Kind { proportional_to_h, fixed };
  Kind kind = Kind::proportional_to_h;
  double value = 0.0;

  static DtRule proportional() { return {}; }
  static DtRule fixed_step(double dt) { return {Kind::fixed, dt}; }

  TimeGrid grid(std::size_t n, double final_time) const {
    if (kind == Kind::proportional_to_h) return TimeGrid::uniform(final_time, n);
    const double ratio = final_time / value;
    const double steps = std::round(ratio);
    if (!(value > 0.0) || steps < 1.0 || std::abs(ratio - steps) > 1e-9 * ratio) {
      throw std::invalid_argument("DtRule: fixed dt must divide T into whole steps");
    }
    return TimeGrid::uniform(final_time, static_cast<std::size_t>(steps));
  }

  std::string describe() const {
    if (kind == Kind::proportional_to_h) return "proportional-to-h (dt = T/n)";
    std::ostringstream os;
    os << "fixed:" << value;
    return os.str();
  }
};

/// Observed order between consecutive levels; log2 of the error ratio when
/// the mesh is halved.
inline double observed_rate(double coarse_error, double fine_error, std::size_t coarse_n,
                            std::size_t fine_n) {
  return std::log(coarse_error / fine_error) /
         std::log(static_cast<double>(fine_n) / static_cast<double>(coarse_n));
}

inline void validate_levels(const std::vector<std::size_t>& levels) {
  if (levels.empty()) throw std::invalid_argument("levels must be nonempty");
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (levels[j] == 0) throw std::invalid_argument("levels must be positive");
    if (j > 0) {
      const std::size_t prev = levels[j - 1];
      const std::size_t ratio = levels[j] / prev;
      if (levels[j] <= prev || levels[j] % prev != 0 || (ratio & (ratio - 1)) != 0) {
        throw std::invalid_argument("each level must be a power-of-two refinement of the previous");
      }
    }
  }
}

struct LevelRun {
  std::size_t n = 0;
  TimeGrid grid{1.0, 1};
  int newton_iterations = 0;
  double max_mass_defect = 0.0;
};

struct ConvergenceLevel {
  LevelRun run;
  double rho_error = 0.0;
  double m_error = 0.0;
  double gradient_error_lbeta = 0.0;
  std::optional<double> rho_rate;
  std::optional<double> m_rate;
};

struct ConvergenceReport {
  std::string case_id;
  std::vector<double> coefficients;
  std::vector<double> exponents;
  DtRule dt_rule;
  NewtonConfig newton;
  double final_time = 1.0;
  std::vector<ConvergenceLevel> levels;
  /// Set when a level failed; levels before it are complete.
  std::optional<std::string> failure;
};

struct DependenceLevel {
  LevelRun run;
  double rho_difference = 0.0;
  double m_difference = 0.0;
  std::optional<double> rho_rate;
  std::optional<double> m_rate;
};

struct DependenceReport {
  std::string case_a;
  std::string case_b;
  std::vector<double> coefficients_a;
  std::vector<double> coefficients_b;
  DtRule dt_rule;
  NewtonConfig newton;
  double final_time = 1.0;
  std::vector<DependenceLevel> levels;
  std::optional<std::string> failure;
};

/// Marches one case on an n x n mesh to its final time.
inline DiscreteState solve_case(const ManufacturedCase& c, std::size_t n, const DtRule& rule,
                                const NewtonConfig& config, LevelRun* info = nullptr) {
  MixedSystem system(c.problem(), MixedSpaces::unit_square(n));
  const TimeGrid grid = rule.grid(n, c.final_time);
  LevelRun run{n, grid, 0, 0.0};
  DiscreteState final_state = time_march(
      system, grid, config,
      [&](const DiscreteState& prev, const DiscreteState& cur, const NewtonReport& rep, std::size_t) {
        run.newton_iterations += rep.iterations;
        run.max_mass_defect = std::max(run.max_mass_defect, std::abs(system.mass_balance_defect(prev, cur)));
      });
  if (info) *info = run;
  return final_state;
}

namespace detail {
/// Runs fn(j) for each level with at most `jobs` in flight, preserving order.
/// Stops at the first failure and reports it with the level.
template <class Result, class Fn>
std::vector<Result> run_levels(const std::vector<std::size_t>& levels, unsigned jobs, Fn fn,
                               std::optional<std::string>& failure) {
  std::vector<Result> results;
  jobs = std::max(1u, jobs);
  for (std::size_t start = 0; start < levels.size(); start += jobs) {
    std::vector<std::future<Result>> batch;
    const std::size_t end = std::min(levels.size(), start + jobs);
    for (std::size_t j = start; j < end; ++j) {
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async,
                                 [&fn, n = levels[j]] { return fn(n); }));
    }
    for (std::size_t j = start; j < end; ++j) {
      try {
        results.push_back(batch[j - start].get());
      } catch (const std::exception& e) {
        failure = "level n=" + std::to_string(levels[j]) + ": " + e.what();
        for (std::size_t k = j + 1; k < end; ++k) batch[k - start].wait();
        return results;
      }
    }
  }
  return results;
}
}  // namespace detail

/// One march per level, errors against the exact fields at the final time.
/// Solver failures are recorded in `failure`; completed levels are kept.
inline ConvergenceReport run_convergence(const ManufacturedCase& c,
                                         const std::vector<std::size_t>& levels,
                                         const DtRule& rule, const NewtonConfig& config,
                                         unsigned jobs = 1) {
  validate_levels(levels);
  ConvergenceReport report;
  report.case_id = c.id;
  report.coefficients.assign(c.poly.coefficients().begin(), c.poly.coefficients().end());
  report.exponents.assign(c.poly.exponents().begin(), c.poly.exponents().end());
  report.dt_rule = rule;
  report.newton = config;
  report.final_time = c.final_time;
  const double beta = c.poly.degeneracy().beta;

  report.levels = detail::run_levels<ConvergenceLevel>(
      levels, jobs,
      [&](std::size_t n) {
        ConvergenceLevel level;
        const DiscreteState s = solve_case(c, n, rule, config, &level.run);
        const double t = s.time;
        level.rho_error = l2_error(s.rho, c.rho_exact, t);
        level.m_error = l2_error(s.m, c.m_exact, t);
        level.gradient_error_lbeta = gradient_lp_error(
            s.rho,
            [&](const Vec2& x, double tt) {
              // Exact gradient is recovered from m = -K grad rho.
              const Vec2 m = c.m_exact(x, tt);
              const double mag = std::hypot(m[0], m[1]);
              const double scale = mag == 0.0 ? 0.0 : -c.poly.g(mag);
              return Vec2{scale * m[0], scale * m[1]};
            },
            t, beta);
        return level;
      },
      report.failure);

  for (std::size_t j = 1; j < report.levels.size(); ++j) {
    auto& prev = report.levels[j - 1];
    auto& cur = report.levels[j];
    cur.rho_rate = observed_rate(prev.rho_error, cur.rho_error, prev.run.n, cur.run.n);
    cur.m_rate = observed_rate(prev.m_error, cur.m_error, prev.run.n, cur.run.n);
  }
  return report;
}

/// Solves both cases on identical grids and measures the L2 distance between
/// the discrete solutions at the final time.
inline DependenceReport run_dependence(const ManufacturedCase& a, const ManufacturedCase& b,
                                       const std::vector<std::size_t>& levels,
                                       const DtRule& rule, const NewtonConfig& config,
                                       unsigned jobs = 1) {
  validate_levels(levels);
  if (a.final_time != b.final_time) {
    throw std::invalid_argument("run_dependence: cases must share the final time");
  }
  DependenceReport report;
  report.case_a = a.id;
  report.case_b = b.id;
  report.coefficients_a.assign(a.poly.coefficients().begin(), a.poly.coefficients().end());
  report.coefficients_b.assign(b.poly.coefficients().begin(), b.poly.coefficients().end());
  report.dt_rule = rule;
  report.newton = config;
  report.final_time = a.final_time;

  report.levels = detail::run_levels<DependenceLevel>(
      levels, jobs,
      [&](std::size_t n) {
        DependenceLevel level;
        LevelRun run_b;
        const DiscreteState sa = solve_case(a, n, rule, config, &level.run);
        const DiscreteState sb = solve_case(b, n, rule, config, &run_b);
        level.run.newton_iterations += run_b.newton_iterations;
        level.run.max_mass_defect = std::max(level.run.max_mass_defect, run_b.max_mass_defect);
        level.rho_difference = l2_norm(ScalarField(sa.rho.space, sa.rho.coefficients - sb.rho.coefficients));
        level.m_difference = l2_norm(VectorField(sa.m.space, sa.m.coefficients - sb.m.coefficients));
        return level;
      },
      report.failure);

  for (std::size_t j = 1; j < report.levels.size(); ++j) {
    auto& prev = report.levels[j - 1];
    auto& cur = report.levels[j];
    cur.rho_rate = observed_rate(prev.rho_difference, cur.rho_difference, prev.run.n, cur.run.n);
    cur.m_rate = observed_rate(prev.m_difference, cur.m_difference, prev.run.n, cur.run.n);
  }
  return report;
}

}  // namespace forchheimer
