#include "chf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

namespace chf {

namespace {

// Fills edges, incidence, signs, boundary data and h_max from vertices/triangles.
void build_topology(Mesh& m) {
  std::map<std::pair<int, int>, int> edge_index;
  m.edges.clear();
  m.edge_triangles.clear();
  m.triangle_edges.assign(m.triangles.size(), {-1, -1, -1});
  m.triangle_edge_sign.assign(m.triangles.size(), {0, 0, 0});

  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3];
      const int b = tri[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_index.try_emplace(
          std::pair<int, int>{key.first, key.second}, static_cast<int>(m.edges.size()));
      if (inserted) {
        m.edges.push_back({key.first, key.second});
        m.edge_triangles.push_back({static_cast<int>(t), -1});
      } else {
        auto& inc = m.edge_triangles[it->second];
        if (inc[1] >= 0) {
          throw MeshError("edge shared by more than two triangles");
        }
        inc[1] = static_cast<int>(t);
      }
      m.triangle_edges[t][i] = it->second;
      // Traversing a -> b is counterclockwise, so the clockwise-rotated
      // tangent of a -> b is outward.
      m.triangle_edge_sign[t][i] = (a < b) ? 1 : -1;
    }
  }

  m.boundary_edges.clear();
  m.boundary_normals.clear();
  m.h_max = 0.0;
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    m.h_max = std::max(m.h_max, m.edge_length(static_cast<int>(e)));
    if (m.edge_triangles[e][1] < 0) {
      const int t = m.edge_triangles[e][0];
      int local = 0;
      while (m.triangle_edges[t][local] != static_cast<int>(e)) ++local;
      m.boundary_edges.push_back(static_cast<int>(e));
      m.boundary_normals.push_back(m.triangle_edge_sign[t][local] *
                                   m.edge_normal(static_cast<int>(e)));
    }
  }
}

}  // namespace

double Mesh::area(int t) const {
  const auto& tri = triangles[t];
  const Point a = vertices[tri[1]] - vertices[tri[0]];
  const Point b = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

Point Mesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double Mesh::edge_length(int e) const {
  return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
}

Point Mesh::edge_normal(int e) const {
  const Point t = (vertices[edges[e][1]] - vertices[edges[e][0]]).normalized();
  return {t.y(), -t.x()};
}

Mesh build_unit_square_mesh(int n) {
  if (n < 1) {
    throw MeshError("subdivision count must be positive, got " + std::to_string(n));
  }
  Mesh m;
  const double h = 1.0 / n;
  m.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      m.vertices.emplace_back(i * h, j * h);
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  m.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  build_topology(m);
  return m;
}

Mesh refine_uniform(const Mesh& coarse) {
  Mesh fine;
  const auto nv = coarse.num_vertices();
  const auto ne = coarse.num_edges();
  const auto nt = coarse.num_triangles();

  ParentMap pm;
  pm.n_coarse_vertices = nv;
  pm.n_coarse_triangles = nt;
  pm.n_coarse_edges = ne;

  fine.vertices = coarse.vertices;
  fine.vertices.reserve(nv + ne);
  pm.vertex_parent.resize(nv + ne);
  for (std::size_t v = 0; v < nv; ++v) pm.vertex_parent[v] = static_cast<int>(v);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& ed = coarse.edges[e];
    fine.vertices.push_back(0.5 * (coarse.vertices[ed[0]] + coarse.vertices[ed[1]]));
    pm.vertex_parent[nv + e] = static_cast<int>(e);
  }

  fine.triangles.reserve(4 * nt);
  pm.triangle_parent.reserve(4 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& v = coarse.triangles[t];
    const auto& e = coarse.triangle_edges[t];
    // midpoint opposite local vertex i
    const int m0 = static_cast<int>(nv) + e[0];
    const int m1 = static_cast<int>(nv) + e[1];
    const int m2 = static_cast<int>(nv) + e[2];
    fine.triangles.push_back({v[0], m2, m1});
    fine.triangles.push_back({m2, v[1], m0});
    fine.triangles.push_back({m1, m0, v[2]});
    fine.triangles.push_back({m0, m1, m2});
    for (int c = 0; c < 4; ++c) pm.triangle_parent.push_back(static_cast<int>(t));
  }
  build_topology(fine);

  std::map<std::pair<int, int>, int> lookup;
  for (std::size_t e = 0; e < fine.num_edges(); ++e) {
    lookup[{fine.edges[e][0], fine.edges[e][1]}] = static_cast<int>(e);
  }
  pm.edge_children.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const int a = coarse.edges[e][0];
    const int b = coarse.edges[e][1];
    const int mid = static_cast<int>(nv + e);
    // midpoints are numbered after all coarse vertices, so a < mid and b < mid
    pm.edge_children[e] = {lookup.at({a, mid}), lookup.at({b, mid})};
  }
  fine.parent = std::move(pm);
  return fine;
}

void check_mesh(const Mesh& m) {
  double total = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const double a = m.area(static_cast<int>(t));
    if (!(a > 0.0)) {
      throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
    }
    total += a;
  }
  if (std::abs(total - 1.0) > 1e-12) throw MeshError("triangle areas do not sum to 1");
  std::vector<int> uses(m.num_edges(), 0);
  for (const auto& te : m.triangle_edges)
    for (int e : te) ++uses[e];
  std::size_t n_boundary = 0;
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto& inc = m.edge_triangles[e];
    if (inc[0] < 0) throw MeshError("edge " + std::to_string(e) + " has no triangle");
    if (uses[e] != (inc[1] >= 0 ? 2 : 1)) {
      throw MeshError("edge " + std::to_string(e) + " is used by " + std::to_string(uses[e]) + " triangles");
    }
    if (inc[1] < 0) ++n_boundary;
    if (inc[1] >= 0) {
      int s0 = 0, s1 = 0;
      for (int i = 0; i < 3; ++i) {
        if (m.triangle_edges[inc[0]][i] == static_cast<int>(e)) s0 = m.triangle_edge_sign[inc[0]][i];
        if (m.triangle_edges[inc[1]][i] == static_cast<int>(e)) s1 = m.triangle_edge_sign[inc[1]][i];
      }
      if (s0 * s1 != -1) {
        throw MeshError("interior edge " + std::to_string(e) + " has inconsistent signs");
      }
    }
  }
  if (n_boundary != m.boundary_edges.size()) throw MeshError("boundary edge list incomplete");
  Point flux = Point::Zero();
  double xn = 0.0;
  for (std::size_t b = 0; b < m.boundary_edges.size(); ++b) {
    const int e = m.boundary_edges[b];
    const Point& n = m.boundary_normals[b];
    if (std::abs(n.norm() - 1.0) > 1e-12) throw MeshError("boundary normal not unit");
    const double len = m.edge_length(e);
    flux += len * n;
    const Point mid = 0.5 * (m.vertices[m.edges[e][0]] + m.vertices[m.edges[e][1]]);
    xn += len * mid.dot(n);
  }
  if (flux.norm() > 1e-12) throw MeshError("boundary edges do not close");
  if (std::abs(xn - 2.0 * total) > 1e-12) throw MeshError("boundary edges do not tile the boundary");
}

Mesh build_level_mesh(int level) {
  if (level < 0) throw MeshError("mesh level must be non-negative");
  Mesh m = build_unit_square_mesh(2);
  for (int k = 0; k < level; ++k) m = refine_uniform(m);
  return m;
}

std::string mesh_summary(const Mesh& m) {
  std::ostringstream os;
  os << m.num_vertices() << " vertices, " << m.num_edges() << " edges, "
     << m.num_triangles() << " triangles, h_max=" << m.h_max;
  return os.str();
}

}  // namespace chf
