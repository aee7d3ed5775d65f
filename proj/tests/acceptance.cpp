// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. The refinement studies dominate the runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "forchheimer/analysis.hpp"
#include "forchheimer/manufactured.hpp"
#include "forchheimer/property_checks.hpp"
#include "forchheimer/system.hpp"

using namespace forchheimer;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fix(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

Outcome constitutive_suite() {
  const auto start = Clock::now();
  PropertySampling cfg;
  std::size_t checks = 0;
  std::string failures;
  for (const auto& poly : property_polynomials(20, cfg.seed)) {
    for (const auto& r : check_scalar_properties(poly, cfg)) {
      ++checks;
      if (!r.passed) failures += " [" + describe(poly) + ": " + r.name + " " + r.detail + "]";
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = failures.empty() && elapsed < 5.0;
  return {ok, std::to_string(checks) + " checks on 22 polynomials x " +
                  std::to_string(cfg.xi_samples) + " xi, " + fix(elapsed) + " s (limit 5 s)" + failures};
}

Outcome closed_form_match() {
  const auto xs = sample_xi(1000, 1e6);
  const auto pa = ForchheimerPolynomial::two_term(1.0, 1.0);
  const auto pb = ForchheimerPolynomial::two_term(1.0, 0.95);
  double worst = 0.0;
  for (double xi : xs) {
    const double ka = 2.0 / (1.0 + std::sqrt(1.0 + 4.0 * xi));
    const double kb = 10.0 / (5.0 + std::sqrt(25.0 + 95.0 * xi));
    worst = std::max({worst, std::abs(pa.conductivity(xi) - ka), std::abs(pb.conductivity(xi) - kb)});
  }
  return {worst <= 1e-12, "max |K - closed form| = " + sci(worst) + " over 1000 xi (limit 1e-12)"};
}

Outcome vector_inequalities() {
  PropertySampling cfg;
  std::size_t checks = 0;
  std::string failures;
  for (const auto& poly : property_polynomials(20, cfg.seed)) {
    for (const auto& r : check_vector_properties(poly, cfg)) {
      ++checks;
      if (!r.passed) failures += " [" + describe(poly) + ": " + r.name + " " + r.detail + "]";
    }
  }
  return {failures.empty(), std::to_string(checks) + " checks, " + std::to_string(cfg.vector_pairs) +
                                " pairs each in [-10,10]^2, slack 1e-6" + failures};
}

Outcome jacobian_consistency() {
  const auto c = find_case(2, 'A');
  MixedSystem sys(c.problem(), MixedSpaces::unit_square(4));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> normal;
  const double dt = 0.25;
  const auto size = static_cast<Eigen::Index>(sys.num_unknowns());
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(size), prev(size / 3), dir(size);
    for (Eigen::Index i = 0; i < size; ++i) x[i] = u(rng);
    for (Eigen::Index i = 0; i < prev.size(); ++i) prev[i] = u(rng);
    for (Eigen::Index i = 0; i < size; ++i) dir[i] = normal(rng);
    dir.normalize();
    const double h = 1e-6;
    const Eigen::VectorXd fd =
        (sys.residual_packed(x + h * dir, prev, dt, dt) - sys.residual_packed(x - h * dir, prev, dt, dt)) / (2 * h);
    const Eigen::VectorXd jd = sys.jacobian_packed(x, dt) * dir;
    worst = std::max(worst, (fd - jd).norm() / jd.norm());
  }
  return {worst <= 1e-5, "max relative directional mismatch " + sci(worst) + " over 20 states, n=4 (limit 1e-5)"};
}

Outcome exactness_and_mass_balance() {
  std::ostringstream detail;
  bool ok = true;
  for (double rho0 : {0.0, 2.5}) {
    ProblemData data{ForchheimerPolynomial::two_term(1.0, 1.0)};
    data.source = [](const Vec2&, double) { return 0.0; };
    data.boundary_flux = [](const Vec2&, double, Side) { return 0.0; };
    data.initial_density = [rho0](const Vec2&) { return rho0; };
    MixedSystem sys(std::move(data), MixedSpaces::unit_square(8));
    double worst_res = 0.0, worst_dev = 0.0;
    time_march(sys, TimeGrid::uniform(1.0, 4), NewtonConfig{},
               [&](const DiscreteState& prev, const DiscreteState& cur, const NewtonReport&, std::size_t) {
                 worst_res = std::max(worst_res, sys.residual(cur, prev, cur.time - prev.time).cwiseAbs().maxCoeff());
                 worst_dev = std::max({worst_dev, (cur.rho.coefficients.array() - rho0).abs().maxCoeff(),
                                       cur.m.coefficients.cwiseAbs().maxCoeff()});
               });
    ok = ok && worst_res <= 1e-12 && worst_dev <= 1e-12;
    detail << "rho0=" << rho0 << ": residual " << sci(worst_res) << ", deviation " << sci(worst_dev) << "; ";
  }
  for (char example : {'1', '2'}) {
    const auto c = find_case(example - '0', 'A');
    MixedSystem sys(c.problem(), MixedSpaces::unit_square(8));
    double worst = 0.0;
    time_march(sys, TimeGrid::uniform(1.0, 8), NewtonConfig{},
               [&](const DiscreteState& prev, const DiscreteState& cur, const NewtonReport&, std::size_t) {
                 worst = std::max(worst, std::abs(sys.mass_balance_defect(prev, cur)));
               });
    ok = ok && worst <= 1e-8;
    detail << c.id << " mass defect " << sci(worst) << (example == '1' ? "; " : "");
  }
  return {ok, detail.str() + " (limits 1e-12, 1e-8)"};
}

std::string rate_text(const std::optional<double>& r) { return r ? fix(*r) : std::string("--"); }

std::string table(const ConvergenceReport& rep) {
  std::ostringstream os;
  for (const auto& l : rep.levels) {
    os << " N=" << l.run.n << ":" << sci(l.rho_error) << "/" << rate_text(l.rho_rate) << ","
       << sci(l.m_error) << "/" << rate_text(l.m_rate);
  }
  if (rep.failure) os << " failure: " << *rep.failure;
  return os.str();
}

const std::vector<std::size_t> kConvergenceLevels{4, 8, 16, 32, 64, 128};

Outcome convergence(int example, std::optional<double> n4_reference, bool timed) {
  const auto start = Clock::now();
  const auto rep = run_convergence(find_case(example, 'A'), kConvergenceLevels, DtRule::proportional(),
                                   NewtonConfig{});
  const double elapsed = seconds_since(start);
  std::ostringstream why;
  bool ok = !rep.failure && rep.levels.size() == kConvergenceLevels.size();
  if (ok) {
    for (std::size_t j = 1; j < rep.levels.size(); ++j) {
      if (!(rep.levels[j].rho_error < rep.levels[j - 1].rho_error)) {
        ok = false;
        why << " rho error not decreasing at N=" << rep.levels[j].run.n << ";";
      }
      if (!in_range(*rep.levels[j].m_rate, 0.15, 0.35)) {
        ok = false;
        why << " m rate " << fix(*rep.levels[j].m_rate) << " at N=" << rep.levels[j].run.n << " outside [0.15,0.35];";
      }
    }
    for (std::size_t j = rep.levels.size() - 2; j < rep.levels.size(); ++j) {
      if (!in_range(*rep.levels[j].rho_rate, 0.6, 0.9)) {
        ok = false;
        why << " rho rate " << fix(*rep.levels[j].rho_rate) << " at N=" << rep.levels[j].run.n << " outside [0.6,0.9];";
      }
    }
    if (n4_reference) {
      const double ratio = rep.levels[0].rho_error / *n4_reference;
      if (!in_range(ratio, 1.0 / 3.0, 3.0)) {
        ok = false;
        why << " N=4 rho error off the reference " << sci(*n4_reference) << " by factor "
            << fix(std::max(ratio, 1.0 / ratio)) << " (limit 3);";
      }
    }
  }
  if (timed && elapsed >= 300.0) {
    ok = false;
    why << " runtime over 5 min;";
  }
  return {ok, fix(elapsed) + " s;" + why.str() + table(rep)};
}

Outcome dependence() {
  const std::vector<std::size_t> levels{4, 8, 16, 32, 64};
  const std::vector<double> reference[2] = {{7.610e-4, 5.666e-4, 4.207e-4, 2.705e-4, 1.634e-4},
                                            {1.950e-3, 1.325e-3, 8.858e-4, 5.712e-4, 3.580e-4}};
  std::ostringstream why, tab;
  bool ok = true;
  for (int example : {1, 2}) {
    const auto rep = run_dependence(find_case(example, 'A'), find_case(example, 'B'), levels,
                                    DtRule::proportional(), NewtonConfig{});
    if (rep.failure || rep.levels.size() != levels.size()) {
      ok = false;
      why << " example " << example << " failed: " << rep.failure.value_or("missing levels") << ";";
      continue;
    }
    tab << " ex" << example << ":";
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const auto& l = rep.levels[j];
      tab << " " << sci(l.rho_difference) << "/" << rate_text(l.rho_rate);
      const double ratio = l.rho_difference / reference[example - 1][j];
      if (!in_range(ratio, 0.2, 5.0)) {
        ok = false;
        why << " ex" << example << " N=" << l.run.n << " magnitude off by factor " << fix(std::max(ratio, 1.0 / ratio)) << ";";
      }
      if (j > 0 && !(l.rho_difference < rep.levels[j - 1].rho_difference)) {
        ok = false;
        why << " ex" << example << " not decreasing at N=" << l.run.n << ";";
      }
    }
    const double finest = *rep.levels.back().rho_rate;
    if (!in_range(finest, 0.4, 0.9)) {
      ok = false;
      why << " ex" << example << " finest rate " << fix(finest) << " outside [0.4,0.9];";
    }

    // Halving |a1 - a2| at fixed N.
    const auto make = [example](double a1, const char* id) {
      return example == 1 ? example1(a1, id) : example2(a1, id);
    };
    const auto full = run_dependence(make(1.0, "a"), make(0.95, "b"), {8}, DtRule::proportional(), NewtonConfig{});
    const auto half = run_dependence(make(1.0, "a"), make(0.975, "c"), {8}, DtRule::proportional(), NewtonConfig{});
    const double factor = full.levels.at(0).rho_difference / half.levels.at(0).rho_difference;
    tab << " halving factor " << fix(factor);
    if (!in_range(factor, 1.3, 3.0)) {
      ok = false;
      why << " ex" << example << " halving factor " << fix(factor) << " outside [1.3,3];";
    }
  }
  return {ok, why.str() + tab.str()};
}

Outcome consistency() {
  double worst = 0.0;
  for (const auto& c : case_catalog()) {
    const auto rep = consistency_check(c, 100, 1e-5, 7);
    worst = std::max({worst, rep.max_flux_residual, rep.max_continuity_residual});
  }
  return {worst <= 1e-5, "max residual " + sci(worst) + " over 4 cases x 100 points (limit 1e-5)"};
}

Outcome projection_order() {
  const auto source = [](const Vec2& x) { return std::exp(x[0]) * std::sin(std::numbers::pi * x[1]); };
  std::vector<double> lx, ly;
  for (std::size_t n : {8u, 16u, 32u}) {
    const ScalarP1Space space(std::make_shared<const TriangleMesh>(build_unit_square(n)));
    const auto proj = l2_project(source, space);
    lx.push_back(std::log(1.0 / static_cast<double>(n)));
    ly.push_back(std::log(l2_error(proj, [&](const Vec2& x, double) { return source(x); }, 0.0)));
  }
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < 3; ++i) { xm += lx[i] / 3; ym += ly[i] / 3; }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < 3; ++i) { num += (lx[i] - xm) * (ly[i] - ym); den += (lx[i] - xm) * (lx[i] - xm); }
  const double slope = num / den;
  return {in_range(slope, 1.8, 2.2), "slope " + fix(slope) + " (window [1.8,2.2])"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1 constitutive property suite", constitutive_suite},
      {"AC2 closed-form conductivity", closed_form_match},
      {"AC3 monotonicity and Lipschitz inequalities", vector_inequalities},
      {"AC4 Jacobian consistency", jacobian_consistency},
      {"AC5 exactness and mass balance", exactness_and_mass_balance},
      {"AC6 convergence example 1A", [] { return convergence(1, std::nullopt, true); }},
      {"AC7 convergence example 2A", [] { return convergence(2, 2.331e-1, false); }},
      {"AC8 coefficient dependence 1B/2B", dependence},
      {"AC9 manufactured consistency", consistency},
      {"AC10 L2 projection order", projection_order},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("%s  %s : %s\n", o.passed ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
