#pragma once

/// \file
/// Backward-Euler / Newton solver for the mixed density-momentum system
///
///   (m, z) + (K(|grad rho|) grad rho, z) = 0
///   (phi (rho - rho_prev) / dt, r) - (m, grad r) = (f, r) - <psi, r>
///
/// with continuous P1 for both rho and each component of m. Unknowns are
/// packed as [m_x, m_y, rho].

#include <Eigen/SparseLU>
#if defined(FORCHHEIMER_HAVE_UMFPACK)
#include <Eigen/UmfPackSupport>
#endif

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "forchheimer/constitutive.hpp"
#include "forchheimer/femspace.hpp"

namespace forchheimer {

struct ProblemData {
  ForchheimerPolynomial poly;
  std::function<double(const Vec2&)> porosity = [](const Vec2&) { return 1.0; };
  std::function<double(const Vec2&, double)> source;
  /// Prescribed normal momentum m . nu on the given side.
  std::function<double(const Vec2&, double, Side)> boundary_flux;
  std::function<double(const Vec2&)> initial_density;
};

struct MixedSpaces {
  ScalarP1Space density;
  VectorP1Space momentum;

  explicit MixedSpaces(std::shared_ptr<const TriangleMesh> mesh)
      : density(std::move(mesh)), momentum(density) {}

  static MixedSpaces unit_square(std::size_t n) {
    return MixedSpaces(std::make_shared<const TriangleMesh>(build_unit_square(n)));
  }

  const TriangleMesh& mesh() const { return density.mesh(); }
};

struct DiscreteState {
  ScalarField rho;
  VectorField m;
  double time = 0.0;
};

struct TimeGrid {
  double dt;
  std::size_t steps;

  static TimeGrid uniform(double final_time, std::size_t steps) {
    if (steps == 0 || !(final_time > 0.0)) {
      throw std::invalid_argument("TimeGrid: need steps >= 1 and T > 0");
    }
    return {final_time / static_cast<double>(steps), steps};
  }
  double final_time() const { return dt * static_cast<double>(steps); }
  /// t_i = i dt
  double time(std::size_t i) const { return static_cast<double>(i) * dt; }
};

struct NewtonConfig {
  /// Stop once |R| <= tolerance * (1 + |R_0|).
  double tolerance = 1e-10;
  int max_iterations = 30;
  double backtrack_factor = 0.5;
  int max_backtracks = 8;
};

struct NewtonReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations, double residual, std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(message(iterations, residual, step)),
        iterations_(iterations),
        residual_(residual),
        step_(step) {}

  int iterations() const { return iterations_; }
  double residual_norm() const { return residual_; }
  std::optional<std::size_t> step() const { return step_; }

 private:
  static std::string message(int iterations, double residual, std::optional<std::size_t> step) {
    std::string msg = "Newton did not converge after " + std::to_string(iterations) +
                      " iterations (residual " + std::to_string(residual) + ")";
    if (step) msg += " at time step " + std::to_string(*step);
    return msg;
  }

  int iterations_;
  double residual_;
  std::optional<std::size_t> step_;
};

#if defined(FORCHHEIMER_HAVE_UMFPACK)
using JacobianSolver = Eigen::UmfPackLU<SparseMatrix>;
#else
using JacobianSolver = Eigen::SparseLU<SparseMatrix>;
#endif

class MixedSystem {
 public:
  MixedSystem(ProblemData data, MixedSpaces spaces)
      : data_(std::move(data)), spaces_(std::move(spaces)) {
    const auto& space = spaces_.density;
    const auto& rule = triangle_rule_degree4();
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
      for (const auto& b : rule.points) {
        const double phi = data_.porosity(barycentric_to_physical(space.geometry(t), b));
        if (!(phi > 0.0) || !std::isfinite(phi)) {
          throw std::invalid_argument("MixedSystem: porosity must be positive and finite");
        }
      }
    }
    mass_ = assemble_mass(space);
    porosity_mass_ = assemble_mass(space, data_.porosity);
    build_coupling();
  }

  const ProblemData& data() const { return data_; }
  const MixedSpaces& spaces() const { return spaces_; }
  std::size_t num_vertices() const { return spaces_.density.num_dofs(); }
  std::size_t num_unknowns() const { return 3 * num_vertices(); }

  /// Scalar P1 mass matrix M.
  const SparseMatrix& mass() const { return mass_; }
  /// Porosity-weighted mass matrix M_phi.
  const SparseMatrix& porosity_mass() const { return porosity_mass_; }
  /// G_c(i, j) = (d_c phi_j, phi_i).
  const SparseMatrix& gradient_coupling(int c) const { return coupling_[c]; }

  Eigen::VectorXd pack(const DiscreteState& s) const {
    const auto n = static_cast<Eigen::Index>(num_vertices());
    Eigen::VectorXd x(3 * n);
    x.head(2 * n) = s.m.coefficients;
    x.tail(n) = s.rho.coefficients;
    return x;
  }

  DiscreteState unpack(const Eigen::VectorXd& x, double time) const {
    const auto n = static_cast<Eigen::Index>(num_vertices());
    return {ScalarField(spaces_.density, x.tail(n)),
            VectorField(spaces_.momentum, x.head(2 * n)), time};
  }

  /// rho_h^0 = L2 projection of rho^0; m_h^0 from the momentum equation.
  DiscreteState initial_state() const {
    ScalarField rho = l2_project(data_.initial_density, spaces_.density);
    const Eigen::VectorXd load = flux_load(rho.coefficients);
    const auto n = static_cast<Eigen::Index>(num_vertices());
    Eigen::SimplicialLDLT<SparseMatrix> mass_solver(mass_);
    if (mass_solver.info() != Eigen::Success) {
      throw std::runtime_error("initial_state: mass factorization failed");
    }
    Eigen::VectorXd m(2 * n);
    m.head(n) = -mass_solver.solve(load.head(n));
    m.tail(n) = -mass_solver.solve(load.tail(n));
    return {std::move(rho), VectorField(spaces_.momentum, std::move(m)), 0.0};
  }

  /// (f(t), phi_i)
  Eigen::VectorXd source_load(double time) const {
    return assemble_load(spaces_.density,
                         [&](const Vec2& x) { return data_.source(x, time); });
  }

  /// <psi(t), phi_i> over the boundary, by three-point Gauss per edge.
  Eigen::VectorXd boundary_load(double time) const {
    const auto& mesh = spaces_.mesh();
    const auto& rule = edge_rule_gauss3();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_vertices()));
    for (const auto& edge : mesh.boundary_edges) {
      const Vec2& p0 = mesh.vertices[edge.vertices[0]];
      const Vec2& p1 = mesh.vertices[edge.vertices[1]];
      const double len = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double s = rule.points[q];
        const Vec2 x{p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])};
        const double v = rule.weights[q] * len * data_.boundary_flux(x, time, edge.side);
        b[static_cast<Eigen::Index>(edge.vertices[0])] += v * (1.0 - s);
        b[static_cast<Eigen::Index>(edge.vertices[1])] += v * s;
      }
    }
    return b;
  }

  /// (K(|grad rho|) grad rho, z) for z = phi_i e_c, packed like m.
  Eigen::VectorXd flux_load(const Eigen::VectorXd& rho) const {
    const auto& space = spaces_.density;
    const auto n = static_cast<Eigen::Index>(num_vertices());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n);
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
      const Vec2 grad = element_gradient(space, rho, t);
      const double k = data_.poly.conductivity(std::hypot(grad[0], grad[1]));
      const double w = space.geometry(t).area / 3.0;
      for (auto v : space.element_dofs(t)) {
        b[static_cast<Eigen::Index>(v)] += w * k * grad[0];
        b[n + static_cast<Eigen::Index>(v)] += w * k * grad[1];
      }
    }
    return b;
  }

  /// Residual of the fully discrete equations at candidate.time.
  Eigen::VectorXd residual(const DiscreteState& candidate, const DiscreteState& previous,
                           double dt) const {
    return residual_packed(pack(candidate), previous.rho.coefficients, candidate.time, dt);
  }

  Eigen::VectorXd residual_packed(const Eigen::VectorXd& x, const Eigen::VectorXd& rho_prev,
                                  double time, double dt) const {
    return residual_with_loads(x, rho_prev, dt, boundary_load(time) - source_load(time));
  }

  /// Jacobian [[M, 0, C_x], [0, M, C_y], [-G_x^T, -G_y^T, M_phi / dt]].
  SparseMatrix jacobian(const DiscreteState& candidate, double dt) const {
    return jacobian_packed(pack(candidate), dt);
  }

  SparseMatrix jacobian_packed(const Eigen::VectorXd& x, double dt) const {
    const auto& space = spaces_.density;
    const auto n = static_cast<Eigen::Index>(num_vertices());
    const Eigen::VectorXd rho = x.tail(n);
    std::vector<Triplet> triplets = constant_triplets(dt);
    triplets.reserve(triplets.size() + 18 * space.mesh().num_triangles());
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
      const auto& geo = space.geometry(t);
      const auto& dofs = space.element_dofs(t);
      const auto flux = data_.poly.flux(element_gradient(space, rho, t));
      const double w = geo.area / 3.0;
      for (int j = 0; j < 3; ++j) {
        const auto& gj = geo.grads[j];
        const double dx = flux.jacobian[0][0] * gj[0] + flux.jacobian[0][1] * gj[1];
        const double dy = flux.jacobian[1][0] * gj[0] + flux.jacobian[1][1] * gj[1];
        const auto col = 2 * n + static_cast<Eigen::Index>(dofs[j]);
        for (int i = 0; i < 3; ++i) {
          const auto row = static_cast<Eigen::Index>(dofs[i]);
          triplets.emplace_back(row, col, w * dx);
          triplets.emplace_back(n + row, col, w * dy);
        }
      }
    }
    SparseMatrix jac(3 * n, 3 * n);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    return jac;
  }

  /// Damped Newton from `previous` (or `guess`) to the state at previous.time + dt.
  DiscreteState newton_solve(const DiscreteState& previous, double dt, const NewtonConfig& config,
                             NewtonReport* report = nullptr,
                             const DiscreteState* guess = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("newton_solve: dt must be positive");
    const double time = previous.time + dt;
    const Eigen::VectorXd& rho_prev = previous.rho.coefficients;
    const Eigen::VectorXd loads = boundary_load(time) - source_load(time);
    Eigen::VectorXd x = pack(guess ? *guess : previous);
    Eigen::VectorXd r = residual_with_loads(x, rho_prev, dt, loads);
    double norm = r.norm();
    NewtonReport rep;
    rep.initial_residual = norm;
    const double target = config.tolerance * (1.0 + norm);

    while (norm > target) {
      if (rep.iterations >= config.max_iterations) {
        rep.final_residual = norm;
        if (report) *report = rep;
        throw NonConvergence(rep.iterations, norm);
      }
      const SparseMatrix jac = jacobian_packed(x, dt);
      if (!pattern_analyzed_) {
        lu_.analyzePattern(jac);
        pattern_analyzed_ = true;
      }
      lu_.factorize(jac);
      if (lu_.info() != Eigen::Success) {
        throw std::runtime_error("newton_solve: Jacobian factorization failed");
      }
      const Eigen::VectorXd rhs = -r;
      const Eigen::VectorXd delta = lu_.solve(rhs);

      double step = 1.0;
      Eigen::VectorXd trial = x + delta;
      Eigen::VectorXd trial_r = residual_with_loads(trial, rho_prev, dt, loads);
      for (int b = 0; b < config.max_backtracks && !(trial_r.norm() < norm); ++b) {
        step *= config.backtrack_factor;
        trial = x + step * delta;
        trial_r = residual_with_loads(trial, rho_prev, dt, loads);
      }
      x = std::move(trial);
      r = std::move(trial_r);
      norm = r.norm();
      ++rep.iterations;
    }
    rep.final_residual = norm;
    if (report) *report = rep;
    return unpack(x, time);
  }

  /// int phi (rho - rho_prev)/dt - int f + int_boundary psi; zero for exact
  /// solutions of the discrete equations (test function r == 1).
  double mass_balance_defect(const DiscreteState& previous, const DiscreteState& current) const {
    const double dt = current.time - previous.time;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(num_vertices()));
    const double storage =
        ones.dot(porosity_mass_ * (current.rho.coefficients - previous.rho.coefficients)) / dt;
    return storage - source_load(current.time).sum() + boundary_load(current.time).sum();
  }

 private:
  Eigen::VectorXd residual_with_loads(const Eigen::VectorXd& x, const Eigen::VectorXd& rho_prev,
                                      double dt, const Eigen::VectorXd& loads) const {
    const auto n = static_cast<Eigen::Index>(num_vertices());
    Eigen::VectorXd r(3 * n);
    const Eigen::VectorXd rho = x.tail(n);
    const Eigen::VectorXd fl = flux_load(rho);
    r.head(n) = mass_ * x.head(n) + fl.head(n);
    r.segment(n, n) = mass_ * x.segment(n, n) + fl.tail(n);
    r.tail(n) = porosity_mass_ * (rho - rho_prev) / dt -
                coupling_[0].transpose() * x.head(n) -
                coupling_[1].transpose() * x.segment(n, n) + loads;
    return r;
  }

  void build_coupling() {
    const auto& space = spaces_.density;
    const auto n = static_cast<Eigen::Index>(num_vertices());
    std::vector<Triplet> tx, ty;
    tx.reserve(9 * space.mesh().num_triangles());
    ty.reserve(9 * space.mesh().num_triangles());
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
      const auto& geo = space.geometry(t);
      const auto& dofs = space.element_dofs(t);
      const double w = geo.area / 3.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const auto row = static_cast<Eigen::Index>(dofs[i]);
          const auto col = static_cast<Eigen::Index>(dofs[j]);
          tx.emplace_back(row, col, w * geo.grads[j][0]);
          ty.emplace_back(row, col, w * geo.grads[j][1]);
        }
      }
    }
    coupling_[0].resize(n, n);
    coupling_[1].resize(n, n);
    coupling_[0].setFromTriplets(tx.begin(), tx.end());
    coupling_[1].setFromTriplets(ty.begin(), ty.end());
  }

  std::vector<Triplet> constant_triplets(double dt) const {
    const auto n = static_cast<Eigen::Index>(num_vertices());
    std::vector<Triplet> out;
    out.reserve(static_cast<std::size_t>(2 * mass_.nonZeros() + 3 * porosity_mass_.nonZeros()));
    for (Eigen::Index k = 0; k < mass_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(mass_, k); it; ++it) {
        out.emplace_back(it.row(), it.col(), it.value());
        out.emplace_back(n + it.row(), n + it.col(), it.value());
      }
    }
    for (Eigen::Index k = 0; k < porosity_mass_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(porosity_mass_, k); it; ++it) {
        out.emplace_back(2 * n + it.row(), 2 * n + it.col(), it.value() / dt);
      }
    }
    for (int c = 0; c < 2; ++c) {
      for (Eigen::Index k = 0; k < coupling_[c].outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(coupling_[c], k); it; ++it) {
          // -(m, grad r): row r = phi_col, column m_c at phi_row.
          out.emplace_back(2 * n + it.col(), c * n + it.row(), -it.value());
        }
      }
    }
    return out;
  }

  ProblemData data_;
  MixedSpaces spaces_;
  SparseMatrix mass_;
  SparseMatrix porosity_mass_;
  std::array<SparseMatrix, 2> coupling_;
  JacobianSolver lu_;
  bool pattern_analyzed_ = false;
};

/// Per-step callback: (previous, current, Newton report, step index from 1).
using StepObserver =
    std::function<void(const DiscreteState&, const DiscreteState&, const NewtonReport&, std::size_t)>;

/// Backward-Euler march over `grid`; NonConvergence carries the failing step.
inline DiscreteState time_march(MixedSystem& system, const TimeGrid& grid,
                                const NewtonConfig& config, const StepObserver& observer = {}) {
  DiscreteState state = system.initial_state();
  for (std::size_t i = 1; i <= grid.steps; ++i) {
    NewtonReport report;
    DiscreteState next = [&] {
      try {
        return system.newton_solve(state, grid.dt, config, &report);
      } catch (const NonConvergence& e) {
        throw NonConvergence(e.iterations(), e.residual_norm(), i);
      }
    }();
    // Pin the stamp to i dt so long marches do not accumulate drift.
    next.time = grid.time(i);
    if (observer) observer(state, next, report, i);
    state = std::move(next);
  }
  return state;
}

}  // namespace forchheimer
