#pragma once

/// \file
/// Continuous piecewise-linear scalar and vector spaces on a TriangleMesh,
/// field evaluation, mass matrices, and L2 projection.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <concepts>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "forchheimer/mesh.hpp"
#include "forchheimer/quadrature.hpp"

namespace forchheimer {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct ElementGeometry {
  AffineMap map;
  double area;
  /// Constant gradients of the three barycentric hat functions.
  std::array<Vec2, 3> grads;
};

/// Hat-function values at a reference point (xi, eta).
inline std::array<double, 3> p1_basis(const Vec2& ref) {
  return {1.0 - ref[0] - ref[1], ref[0], ref[1]};
}

class ScalarP1Space {
 public:
  explicit ScalarP1Space(std::shared_ptr<const TriangleMesh> mesh)
      : mesh_(std::move(mesh)) {
    if (!mesh_) throw std::invalid_argument("ScalarP1Space: null mesh");
    auto geometry = std::make_shared<std::vector<ElementGeometry>>();
    geometry->reserve(mesh_->num_triangles());
    for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
      ElementGeometry g{};
      g.map = reference_map(*mesh_, t);
      g.area = 0.5 * std::abs(g.map.det);
      const auto& j = g.map.jacobian;
      const double inv = 1.0 / g.map.det;
      g.grads[1] = {j[1][1] * inv, -j[0][1] * inv};
      g.grads[2] = {-j[1][0] * inv, j[0][0] * inv};
      g.grads[0] = {-g.grads[1][0] - g.grads[2][0], -g.grads[1][1] - g.grads[2][1]};
      geometry->push_back(g);
    }
    geometry_ = std::move(geometry);
  }

  const TriangleMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriangleMesh>& mesh_ptr() const { return mesh_; }
  std::size_t num_dofs() const { return mesh_->num_vertices(); }
  const ElementGeometry& geometry(std::size_t t) const { return (*geometry_)[t]; }
  const std::array<std::size_t, 3>& element_dofs(std::size_t t) const {
    return mesh_->triangles[t];
  }

 private:
  std::shared_ptr<const TriangleMesh> mesh_;
  std::shared_ptr<const std::vector<ElementGeometry>> geometry_;
};

/// Two scalar P1 components; dof layout is [x-components..., y-components...].
class VectorP1Space {
 public:
  explicit VectorP1Space(ScalarP1Space scalar) : scalar_(std::move(scalar)) {}
  explicit VectorP1Space(std::shared_ptr<const TriangleMesh> mesh)
      : scalar_(std::move(mesh)) {}

  const ScalarP1Space& scalar() const { return scalar_; }
  const TriangleMesh& mesh() const { return scalar_.mesh(); }
  std::size_t num_dofs() const { return 2 * scalar_.num_dofs(); }
  std::size_t dof(int component, std::size_t vertex) const {
    return static_cast<std::size_t>(component) * scalar_.num_dofs() + vertex;
  }

 private:
  ScalarP1Space scalar_;
};

template <class Space>
struct FeField {
  Space space;
  Eigen::VectorXd coefficients;

  explicit FeField(Space s)
      : space(std::move(s)),
        coefficients(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.num_dofs()))) {}
  FeField(Space s, Eigen::VectorXd c) : space(std::move(s)), coefficients(std::move(c)) {
    if (coefficients.size() != static_cast<Eigen::Index>(space.num_dofs())) {
      throw std::invalid_argument("FeField: coefficient length does not match space");
    }
  }
};

using ScalarField = FeField<ScalarP1Space>;
using VectorField = FeField<VectorP1Space>;

inline double eval_field(const ScalarField& field, std::size_t t, const Vec2& ref) {
  const auto phi = p1_basis(ref);
  const auto& dofs = field.space.element_dofs(t);
  double v = 0.0;
  for (int k = 0; k < 3; ++k) v += phi[k] * field.coefficients[static_cast<Eigen::Index>(dofs[k])];
  return v;
}

inline Vec2 eval_field(const VectorField& field, std::size_t t, const Vec2& ref) {
  const auto phi = p1_basis(ref);
  const auto& dofs = field.space.scalar().element_dofs(t);
  Vec2 v{0.0, 0.0};
  for (int c = 0; c < 2; ++c) {
    for (int k = 0; k < 3; ++k) {
      v[c] += phi[k] * field.coefficients[static_cast<Eigen::Index>(field.space.dof(c, dofs[k]))];
    }
  }
  return v;
}

/// Gradient of a P1 function restricted to triangle t (constant there).
inline Vec2 element_gradient(const ScalarP1Space& space, const Eigen::VectorXd& coefficients,
                             std::size_t t) {
  const auto& geo = space.geometry(t);
  const auto& dofs = space.element_dofs(t);
  Vec2 g{0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    const double v = coefficients[static_cast<Eigen::Index>(dofs[k])];
    g[0] += v * geo.grads[k][0];
    g[1] += v * geo.grads[k][1];
  }
  return g;
}

inline Vec2 eval_gradient(const ScalarField& field, std::size_t t) {
  return element_gradient(field.space, field.coefficients, t);
}

/// Physical coordinates of barycentric point `bary` on triangle t.
inline Vec2 barycentric_to_physical(const ElementGeometry& geo, const std::array<double, 3>& bary) {
  return geo.map({bary[1], bary[2]});
}

/// Weighted scalar mass matrix (w phi_j, phi_i), integrated with the degree-4
/// rule. With w == 1 the rule is exact.
template <std::invocable<const Vec2&> Weight>
SparseMatrix assemble_mass(const ScalarP1Space& space, const Weight& weight) {
  const auto& rule = triangle_rule_degree4();
  const auto n = static_cast<Eigen::Index>(space.num_dofs());
  std::vector<Triplet> triplets;
  triplets.reserve(9 * space.mesh().num_triangles());
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto& geo = space.geometry(t);
    const auto& dofs = space.element_dofs(t);
    std::array<std::array<double, 3>, 3> local{};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& b = rule.points[q];
      const double wq = rule.weights[q] * geo.area * weight(barycentric_to_physical(geo, b));
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) local[i][j] += wq * b[i] * b[j];
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        triplets.emplace_back(static_cast<Eigen::Index>(dofs[i]),
                              static_cast<Eigen::Index>(dofs[j]), local[i][j]);
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Scalar P1 mass matrix; element matrix area/12 * [[2,1,1],[1,2,1],[1,1,2]].
inline SparseMatrix assemble_mass(const ScalarP1Space& space) {
  const auto n = static_cast<Eigen::Index>(space.num_dofs());
  std::vector<Triplet> triplets;
  triplets.reserve(9 * space.mesh().num_triangles());
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const double a = space.geometry(t).area / 12.0;
    const auto& dofs = space.element_dofs(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        triplets.emplace_back(static_cast<Eigen::Index>(dofs[i]),
                              static_cast<Eigen::Index>(dofs[j]), i == j ? 2.0 * a : a);
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Block-diagonal vector mass matrix diag(M, M).
inline SparseMatrix assemble_mass(const VectorP1Space& space) {
  const SparseMatrix scalar = assemble_mass(space.scalar());
  const auto n = scalar.rows();
  std::vector<Triplet> triplets;
  triplets.reserve(2 * static_cast<std::size_t>(scalar.nonZeros()));
  for (int c = 0; c < 2; ++c) {
    for (Eigen::Index k = 0; k < scalar.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(scalar, k); it; ++it) {
        triplets.emplace_back(it.row() + c * n, it.col() + c * n, it.value());
      }
    }
  }
  SparseMatrix m(2 * n, 2 * n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Load vector (source, phi_i) with the degree-4 rule.
template <std::invocable<const Vec2&> Source>
Eigen::VectorXd assemble_load(const ScalarP1Space& space, const Source& source) {
  const auto& rule = triangle_rule_degree4();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.num_dofs()));
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto& geo = space.geometry(t);
    const auto& dofs = space.element_dofs(t);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& bq = rule.points[q];
      const double v = rule.weights[q] * geo.area * source(barycentric_to_physical(geo, bq));
      for (int i = 0; i < 3; ++i) b[static_cast<Eigen::Index>(dofs[i])] += v * bq[i];
    }
  }
  return b;
}

template <std::invocable<const Vec2&> Source>
Eigen::VectorXd assemble_load(const VectorP1Space& space, const Source& source) {
  const auto& rule = triangle_rule_degree4();
  const auto& scalar = space.scalar();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.num_dofs()));
  for (std::size_t t = 0; t < scalar.mesh().num_triangles(); ++t) {
    const auto& geo = scalar.geometry(t);
    const auto& dofs = scalar.element_dofs(t);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& bq = rule.points[q];
      const double w = rule.weights[q] * geo.area;
      const Vec2 v = source(barycentric_to_physical(geo, bq));
      for (int i = 0; i < 3; ++i) {
        for (int c = 0; c < 2; ++c) {
          b[static_cast<Eigen::Index>(space.dof(c, dofs[i]))] += w * v[c] * bq[i];
        }
      }
    }
  }
  return b;
}

namespace detail {
inline Eigen::VectorXd solve_spd(const SparseMatrix& matrix, const Eigen::VectorXd& rhs) {
  Eigen::SimplicialLDLT<SparseMatrix> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("mass matrix factorization failed");
  }
  Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw std::runtime_error("mass matrix solve failed");
  return x;
}
}  // namespace detail

/// L2 projection: solves M c = (source, phi_i).
template <class Source>
  requires std::invocable<const Source&, const Vec2&> &&
           std::convertible_to<std::invoke_result_t<const Source&, const Vec2&>, double>
ScalarField l2_project(const Source& source, const ScalarP1Space& space) {
  return ScalarField(space, detail::solve_spd(assemble_mass(space), assemble_load(space, source)));
}

template <class Source>
  requires std::invocable<const Source&, const Vec2&> &&
           std::same_as<std::invoke_result_t<const Source&, const Vec2&>, Vec2>
VectorField l2_project(const Source& source, const VectorP1Space& space) {
  return VectorField(space, detail::solve_spd(assemble_mass(space), assemble_load(space, source)));
}

}  // namespace forchheimer
