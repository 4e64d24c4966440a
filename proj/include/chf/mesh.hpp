#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace chf {

using Point = Eigen::Vector2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fine-to-coarse bookkeeping written by refine_uniform().
///
/// Fine vertices 0..n_coarse_vertices-1 coincide with the coarse vertices;
/// the remaining ones are coarse edge midpoints. Fine triangle 4*t+c is the
/// c-th child of coarse triangle t (c = 3 is the centre child).
struct ParentMap {
  std::size_t n_coarse_vertices = 0;
  std::size_t n_coarse_triangles = 0;
  std::size_t n_coarse_edges = 0;
  std::vector<int> triangle_parent;
  /// coarse vertex index for i < n_coarse_vertices, else coarse edge index
  std::vector<int> vertex_parent;
  /// fine halves of each coarse edge, ordered low-vertex half first
  std::vector<std::array<int, 2>> edge_children;
};

/// Conforming triangulation of a polygonal domain.
///
/// Triangles are counterclockwise. Edge e runs from edges[e][0] to
/// edges[e][1] with edges[e][0] < edges[e][1]; its global unit normal is the
/// tangent rotated clockwise. Local edge i of a triangle is the one opposite
/// local vertex i, and triangle_edge_sign is +1 where the global normal points
/// out of the triangle.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> triangle_edges;
  std::vector<std::array<int, 3>> triangle_edge_sign;
  /// incident triangles per edge, second entry -1 on the boundary
  std::vector<std::array<int, 2>> edge_triangles;
  std::vector<int> boundary_edges;
  std::vector<Point> boundary_normals;
  std::optional<ParentMap> parent;
  double h_max = 0.0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_edges() const { return edges.size(); }

  double area(int t) const;
  Point centroid(int t) const;
  double edge_length(int e) const;
  /// global unit normal of edge e
  Point edge_normal(int e) const;
  bool is_boundary_edge(int e) const { return edge_triangles[e][1] < 0; }
};

/// n x n squares on [0,1]^2, each split along the bottom-left to top-right diagonal.
Mesh build_unit_square_mesh(int n);

/// Red refinement: every triangle is split into four congruent children.
Mesh refine_uniform(const Mesh& coarse);

/// Throws MeshError describing the first violated conformity property.
void check_mesh(const Mesh& mesh);

/// Mesh of [0,1]^2 after `level` uniform refinements of the n = 2 mesh,
/// so h_max = sqrt(2) * 2^{-1-level}.
Mesh build_level_mesh(int level);

std::string mesh_summary(const Mesh& mesh);

}  // namespace chf
