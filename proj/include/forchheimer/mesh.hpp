#pragma once

/// \file
/// Uniform triangulations of the unit square.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "forchheimer/constitutive.hpp"

namespace forchheimer {

enum class Side { left, right, bottom, top };

inline const char* to_string(Side side) {
  switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

inline Vec2 outward_normal(Side side) {
  switch (side) {
    case Side::left: return {-1.0, 0.0};
    case Side::right: return {1.0, 0.0};
    case Side::bottom: return {0.0, -1.0};
    case Side::top: return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

struct BoundaryEdge {
  std::array<std::size_t, 2> vertices;
  Vec2 normal;
  Side side;
};

/// Affine map x = jacobian * xi + offset from the reference triangle
/// {(0,0), (1,0), (0,1)}.
struct AffineMap {
  Mat2 jacobian;
  Vec2 offset;
  double det;

  Vec2 operator()(const Vec2& ref) const {
    return {jacobian[0][0] * ref[0] + jacobian[0][1] * ref[1] + offset[0],
            jacobian[1][0] * ref[0] + jacobian[1][1] * ref[1] + offset[1]};
  }
};

struct TriangleMesh {
  std::vector<Vec2> vertices;
  /// Counterclockwise vertex triples.
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  /// Cells per side of the square.
  std::size_t subdivisions = 0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  double h() const { return 1.0 / static_cast<double>(subdivisions); }
};

/// n x n grid of cells, each cut along its lower-left to upper-right
/// diagonal. Vertices are numbered row by row from the bottom.
inline TriangleMesh build_unit_square(std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_unit_square: n must be >= 1");
  TriangleMesh mesh;
  mesh.subdivisions = n;
  const std::size_t stride = n + 1;
  const double h = 1.0 / static_cast<double>(n);
  mesh.vertices.reserve(stride * stride);
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      // Snap the last row/column so the boundary sits exactly at 1.
      const double x = i == n ? 1.0 : static_cast<double>(i) * h;
      const double y = j == n ? 1.0 : static_cast<double>(j) * h;
      mesh.vertices.push_back({x, y});
    }
  }
  auto id = [stride](std::size_t i, std::size_t j) { return j * stride + i; };
  mesh.triangles.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v00 = id(i, j), v10 = id(i + 1, j);
      const std::size_t v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  mesh.boundary_edges.reserve(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    mesh.boundary_edges.push_back({{id(i, 0), id(i + 1, 0)}, outward_normal(Side::bottom), Side::bottom});
    mesh.boundary_edges.push_back({{id(n, i), id(n, i + 1)}, outward_normal(Side::right), Side::right});
    mesh.boundary_edges.push_back({{id(i + 1, n), id(i, n)}, outward_normal(Side::top), Side::top});
    mesh.boundary_edges.push_back({{id(0, i + 1), id(0, i)}, outward_normal(Side::left), Side::left});
  }
  return mesh;
}

inline AffineMap reference_map(const TriangleMesh& mesh, std::size_t triangle) {
  const auto& tri = mesh.triangles.at(triangle);
  const Vec2& p0 = mesh.vertices[tri[0]];
  const Vec2& p1 = mesh.vertices[tri[1]];
  const Vec2& p2 = mesh.vertices[tri[2]];
  AffineMap map{};
  map.jacobian = {{{p1[0] - p0[0], p2[0] - p0[0]}, {p1[1] - p0[1], p2[1] - p0[1]}}};
  map.offset = p0;
  map.det = map.jacobian[0][0] * map.jacobian[1][1] - map.jacobian[0][1] * map.jacobian[1][0];
  return map;
}

inline double triangle_area(const TriangleMesh& mesh, std::size_t triangle) {
  return 0.5 * std::abs(reference_map(mesh, triangle).det);
}

}  // namespace forchheimer
