#include "chf/fe_spaces.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "chf/quadrature.hpp"

namespace chf {

namespace {

// Monomial-type spanning set of RT_1(K) in scaled local coordinates:
// P_1(K)^2 plus x * P_1^H(K).
struct RTPrimal {
  std::array<Vec2, 8> value;
  std::array<double, 8> div;  // with respect to the scaled coordinates
};

RTPrimal rt_primal(const Vec2& xi) {
  const double a = xi.x();
  const double b = xi.y();
  RTPrimal p;
  p.value = {Vec2(1, 0), Vec2(a, 0), Vec2(b, 0), Vec2(0, 1),
             Vec2(0, a), Vec2(0, b), Vec2(a * a, a * b), Vec2(a * b, b * b)};
  p.div = {0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 3.0 * a, 3.0 * b};
  return p;
}

void require_nested(const Mesh& coarse, const Mesh& fine) {
  if (!fine.parent || fine.parent->n_coarse_triangles != coarse.num_triangles() ||
      fine.parent->n_coarse_vertices != coarse.num_vertices() ||
      fine.parent->n_coarse_edges != coarse.num_edges()) {
    throw FEError("meshes are not a uniform refinement pair");
  }
}

// The two normal moments of edge e (in the global orientation) and the
// interior moments of cell t, evaluated for a field given cell-wise.
std::array<double, 2> edge_moments(const Mesh& m, int e, int cell,
                                   const std::function<Vec2(int, const Point&)>& f) {
  const auto& q = default_quadrature();
  const Point a = m.vertices[m.edges[e][0]];
  const Point b = m.vertices[m.edges[e][1]];
  const Vec2 n = m.edge_normal(e);
  std::array<double, 2> mom{0.0, 0.0};
  for (std::size_t k = 0; k < q.edge_points.size(); ++k) {
    const double s = q.edge_points[k];
    const double vn = f(cell, a + s * (b - a)).dot(n);
    mom[0] += q.edge_weights[k] * vn * (1.0 - s);
    mom[1] += q.edge_weights[k] * vn * s;
  }
  return mom;
}

Vec2 interior_moments(const CellGeometry& g, int cell,
                      const std::function<Vec2(int, const Point&)>& f) {
  const auto& q = default_quadrature();
  Vec2 mom = Vec2::Zero();
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    mom += q.weights[k] * f(cell, g.map(q.points[k]));
  }
  return mom;
}

int locate_cell(const Mesh& m, const Point& x) {
  int best = -1;
  double best_min = -1e300;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto bary = cell_geometry(m, static_cast<int>(t)).barycentric(x);
    const double mn = std::min({bary[0], bary[1], bary[2]});
    if (mn > best_min) {
      best_min = mn;
      best = static_cast<int>(t);
    }
    if (mn >= 0.0) break;
  }
  if (best_min < -1e-10) throw FEError("point outside the mesh");
  return best;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::CG1: return "CG1";
    case Family::RT1: return "RT1";
    case Family::DG1: return "DG1";
  }
  return "?";
}

std::array<double, 3> CellGeometry::barycentric(const Point& x) const {
  std::array<double, 3> l{};
  for (int i = 0; i < 3; ++i) l[i] = grad_lambda[i].dot(x - vertices[(i + 1) % 3]);
  return l;
}

CellGeometry cell_geometry(const Mesh& mesh, int t) {
  CellGeometry g;
  const auto& tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) g.vertices[i] = mesh.vertices[tri[i]];
  g.area = mesh.area(t);
  for (int i = 0; i < 3; ++i) {
    const Point& p1 = g.vertices[(i + 1) % 3];
    const Point& p2 = g.vertices[(i + 2) % 3];
    g.grad_lambda[i] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / (2.0 * g.area);
  }
  return g;
}

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, Family family)
    : mesh_(std::move(mesh)), family_(family) {
  const Mesh& m = *mesh_;
  const auto nt = m.num_triangles();
  switch (family_) {
    case Family::CG1:
      dofs_per_cell_ = 3;
      ndofs_ = m.num_vertices();
      cell_dofs_.reserve(3 * nt);
      for (const auto& tri : m.triangles) cell_dofs_.insert(cell_dofs_.end(), tri.begin(), tri.end());
      break;
    case Family::DG1:
      dofs_per_cell_ = 3;
      ndofs_ = 3 * nt;
      cell_dofs_.resize(3 * nt);
      for (std::size_t i = 0; i < 3 * nt; ++i) cell_dofs_[i] = static_cast<int>(i);
      break;
    case Family::RT1: {
      dofs_per_cell_ = 8;
      const auto ne = m.num_edges();
      ndofs_ = 2 * ne + 2 * nt;
      cell_dofs_.reserve(8 * nt);
      for (std::size_t t = 0; t < nt; ++t) {
        for (int le = 0; le < 3; ++le) {
          const int e = m.triangle_edges[t][le];
          cell_dofs_.push_back(2 * e);
          cell_dofs_.push_back(2 * e + 1);
        }
        cell_dofs_.push_back(static_cast<int>(2 * ne + 2 * t));
        cell_dofs_.push_back(static_cast<int>(2 * ne + 2 * t + 1));
      }
      build_rt_basis();
      break;
    }
  }
}

int FESpace::dof_sign(int t, int local) const {
  if (family_ != Family::RT1) return 1;
  return local < 6 ? mesh_->triangle_edge_sign[t][local / 2] : 1;
}

void FESpace::build_rt_basis() {
  const Mesh& m = *mesh_;
  const auto nt = m.num_triangles();
  rt_coef_.resize(nt);
  rt_centre_.resize(nt);
  rt_scale_.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const int cell = static_cast<int>(t);
    const Point c = m.centroid(cell);
    const double scale = std::sqrt(m.area(cell));
    rt_centre_[t] = c;
    rt_scale_[t] = scale;

    // dof matrix: row = functional, column = primal function
    Eigen::Matrix<double, 8, 8> D;
    for (int mi = 0; mi < 8; ++mi) {
      auto primal = [&](int, const Point& x) { return rt_primal((x - c) / scale).value[mi]; };
      for (int le = 0; le < 3; ++le) {
        const auto mom = edge_moments(m, m.triangle_edges[t][le], cell, primal);
        D(2 * le, mi) = mom[0];
        D(2 * le + 1, mi) = mom[1];
      }
      const Vec2 in = interior_moments(cell_geometry(m, cell), cell, primal);
      D(6, mi) = in.x();
      D(7, mi) = in.y();
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(D);
    if (!lu.isInvertible()) throw FEError("RT1 degrees of freedom not unisolvent");
    rt_coef_[t] = lu.inverse();
  }
}

RTShape FESpace::rt_shape(int t, const Point& x) const {
  const double scale = rt_scale_[t];
  const RTPrimal p = rt_primal((x - rt_centre_[t]) / scale);
  const auto& C = rt_coef_[t];
  RTShape s;
  for (int i = 0; i < 8; ++i) {
    Vec2 v = Vec2::Zero();
    double d = 0.0;
    for (int mi = 0; mi < 8; ++mi) {
      v += C(mi, i) * p.value[mi];
      d += C(mi, i) * p.div[mi];
    }
    s.value[i] = v;
    s.div[i] = d / scale;
  }
  return s;
}

std::shared_ptr<const FESpace> make_space(std::shared_ptr<const Mesh> mesh, Family family) {
  return std::make_shared<const FESpace>(std::move(mesh), family);
}

double FEField::value(int t, const std::array<double, 3>& bary) const {
  const auto dofs = space->cell_dofs(t);
  return bary[0] * coeffs[dofs[0]] + bary[1] * coeffs[dofs[1]] + bary[2] * coeffs[dofs[2]];
}

Vec2 FEField::gradient(int t) const {
  const auto g = cell_geometry(space->mesh(), t);
  const auto dofs = space->cell_dofs(t);
  return coeffs[dofs[0]] * g.grad_lambda[0] + coeffs[dofs[1]] * g.grad_lambda[1] +
         coeffs[dofs[2]] * g.grad_lambda[2];
}

Vec2 FEField::vector_value(int t, const Point& x) const {
  const auto s = space->rt_shape(t, x);
  const auto dofs = space->cell_dofs(t);
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < 8; ++i) v += coeffs[dofs[i]] * s.value[i];
  return v;
}

double FEField::divergence(int t, const Point& x) const {
  const auto s = space->rt_shape(t, x);
  const auto dofs = space->cell_dofs(t);
  double d = 0.0;
  for (int i = 0; i < 8; ++i) d += coeffs[dofs[i]] * s.div[i];
  return d;
}

double FEField::value_at(const Point& x) const {
  const int t = locate_cell(space->mesh(), x);
  return value(t, cell_geometry(space->mesh(), t).barycentric(x));
}

Vec2 FEField::vector_value_at(const Point& x) const {
  return vector_value(locate_cell(space->mesh(), x), x);
}

FEField interpolate(std::shared_ptr<const FESpace> space, const ScalarFunction& f) {
  FEField out(space);
  const Mesh& m = space->mesh();
  switch (space->family()) {
    case Family::CG1:
      for (std::size_t v = 0; v < m.num_vertices(); ++v) out.coeffs[static_cast<Eigen::Index>(v)] = f(m.vertices[v]);
      break;
    case Family::DG1:
      for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        for (int i = 0; i < 3; ++i) out.coeffs[static_cast<Eigen::Index>(3 * t + i)] = f(m.vertices[m.triangles[t][i]]);
      }
      break;
    case Family::RT1:
      throw FEError("scalar function cannot be interpolated into RT1");
  }
  return out;
}

FEField interpolate(std::shared_ptr<const FESpace> space, const VectorFunction& f) {
  if (space->family() != Family::RT1) {
    throw FEError(std::string("vector function cannot be interpolated into ") + family_name(space->family()));
  }
  return interpolate_rt_cellwise(std::move(space), [&f](int, const Point& x) { return f(x); });
}

FEField interpolate_rt_cellwise(std::shared_ptr<const FESpace> space,
                                const std::function<Vec2(int, const Point&)>& f) {
  if (space->family() != Family::RT1) throw FEError("RT1 space expected");
  FEField out(space);
  const Mesh& m = space->mesh();
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto mom = edge_moments(m, static_cast<int>(e), m.edge_triangles[e][0], f);
    out.coeffs[static_cast<Eigen::Index>(2 * e)] = mom[0];
    out.coeffs[static_cast<Eigen::Index>(2 * e + 1)] = mom[1];
  }
  const auto base = static_cast<Eigen::Index>(2 * m.num_edges());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Vec2 mom = interior_moments(cell_geometry(m, static_cast<int>(t)), static_cast<int>(t), f);
    out.coeffs[base + static_cast<Eigen::Index>(2 * t)] = mom.x();
    out.coeffs[base + static_cast<Eigen::Index>(2 * t + 1)] = mom.y();
  }
  return out;
}

FEField rt_project(const VectorFunction& v, std::shared_ptr<const FESpace> target, int required_degree) {
  if (required_degree > default_quadrature().degree) {
    throw FEError("quadrature degree " + std::to_string(default_quadrature().degree) +
                  " insufficient for requested degree " + std::to_string(required_degree));
  }
  return interpolate(std::move(target), v);
}

FEField rt_project(const FEField& fine, std::shared_ptr<const FESpace> target) {
  if (fine.space->family() != Family::RT1 || target->family() != Family::RT1) {
    throw FEError("rt_project expects RT1 fields and spaces");
  }
  const Mesh& cm = target->mesh();
  const Mesh& fm = fine.space->mesh();
  require_nested(cm, fm);
  const auto& pm = *fm.parent;
  const auto& q = default_quadrature();

  FEField out(target);
  for (std::size_t e = 0; e < cm.num_edges(); ++e) {
    const Point a = cm.vertices[cm.edges[e][0]];
    const Point b = cm.vertices[cm.edges[e][1]];
    const Vec2 n = cm.edge_normal(static_cast<int>(e));
    double m0 = 0.0, m1 = 0.0;
    for (int half = 0; half < 2; ++half) {
      const int fe = pm.edge_children[e][half];
      const int cell = fm.edge_triangles[fe][0];
      for (std::size_t k = 0; k < q.edge_points.size(); ++k) {
        const double s = 0.5 * (half + q.edge_points[k]);
        const double vn = fine.vector_value(cell, a + s * (b - a)).dot(n);
        m0 += 0.5 * q.edge_weights[k] * vn * (1.0 - s);
        m1 += 0.5 * q.edge_weights[k] * vn * s;
      }
    }
    out.coeffs[static_cast<Eigen::Index>(2 * e)] = m0;
    out.coeffs[static_cast<Eigen::Index>(2 * e + 1)] = m1;
  }
  const auto base = static_cast<Eigen::Index>(2 * cm.num_edges());
  for (std::size_t t = 0; t < cm.num_triangles(); ++t) {
    Vec2 mom = Vec2::Zero();
    for (int c = 0; c < 4; ++c) {
      const int child = static_cast<int>(4 * t + c);
      const auto g = cell_geometry(fm, child);
      for (std::size_t k = 0; k < q.points.size(); ++k) {
        mom += q.weights[k] * g.area * fine.vector_value(child, g.map(q.points[k]));
      }
    }
    mom /= cm.area(static_cast<int>(t));
    out.coeffs[base + static_cast<Eigen::Index>(2 * t)] = mom.x();
    out.coeffs[base + static_cast<Eigen::Index>(2 * t + 1)] = mom.y();
  }
  return out;
}

FEField divergence_field(const FEField& v) {
  if (v.space->family() != Family::RT1) throw FEError("divergence needs an RT1 field");
  auto dg = make_space(v.space->mesh_ptr(), Family::DG1);
  FEField out(dg);
  const Mesh& m = v.space->mesh();
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      out.coeffs[static_cast<Eigen::Index>(3 * t + i)] =
          v.divergence(static_cast<int>(t), m.vertices[m.triangles[t][i]]);
    }
  }
  return out;
}

FEField prolong(const FEField& coarse, std::shared_ptr<const FESpace> fine_space) {
  if (coarse.space->family() != fine_space->family()) throw FEError("prolongation between different families");
  const Mesh& cm = coarse.space->mesh();
  const Mesh& fm = fine_space->mesh();
  require_nested(cm, fm);
  const auto& pm = *fm.parent;

  switch (fine_space->family()) {
    case Family::CG1: {
      FEField out(fine_space);
      for (std::size_t v = 0; v < fm.num_vertices(); ++v) {
        const auto idx = static_cast<Eigen::Index>(v);
        if (v < pm.n_coarse_vertices) {
          out.coeffs[idx] = coarse.coeffs[idx];
        } else {
          const auto& ed = cm.edges[pm.vertex_parent[v]];
          out.coeffs[idx] = 0.5 * (coarse.coeffs[ed[0]] + coarse.coeffs[ed[1]]);
        }
      }
      return out;
    }
    case Family::DG1: {
      FEField out(fine_space);
      for (std::size_t t = 0; t < fm.num_triangles(); ++t) {
        const int parent = pm.triangle_parent[t];
        const auto g = cell_geometry(cm, parent);
        for (int i = 0; i < 3; ++i) {
          const Point x = fm.vertices[fm.triangles[t][i]];
          out.coeffs[static_cast<Eigen::Index>(3 * t + i)] = coarse.value(parent, g.barycentric(x));
        }
      }
      return out;
    }
    case Family::RT1:
      return interpolate_rt_cellwise(fine_space, [&](int cell, const Point& x) {
        return coarse.vector_value(pm.triangle_parent[cell], x);
      });
  }
  throw FEError("unknown family");
}

namespace {

template <typename Integrand>
double integrate_cells(const FEField& f, Integrand&& integrand) {
  const Mesh& m = f.space->mesh();
  const auto& q = default_quadrature();
  double sum = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto g = cell_geometry(m, static_cast<int>(t));
    double cell = 0.0;
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      cell += q.weights[k] * integrand(static_cast<int>(t), g, q.points[k]);
    }
    sum += cell * g.area;
  }
  return sum;
}

}  // namespace

double l2_norm_squared(const FEField& f) {
  if (f.space->family() == Family::RT1) {
    return integrate_cells(f, [&](int t, const CellGeometry& g, const std::array<double, 3>& b) {
      return f.vector_value(t, g.map(b)).squaredNorm();
    });
  }
  return integrate_cells(f, [&](int t, const CellGeometry&, const std::array<double, 3>& b) {
    const double v = f.value(t, b);
    return v * v;
  });
}

double h1_seminorm_squared(const FEField& f) {
  if (f.space->family() == Family::RT1) throw FEError("H1 seminorm of an RT1 field");
  const Mesh& m = f.space->mesh();
  double sum = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    sum += f.gradient(static_cast<int>(t)).squaredNorm() * m.area(static_cast<int>(t));
  }
  return sum;
}

double h1_norm_squared(const FEField& f) { return l2_norm_squared(f) + h1_seminorm_squared(f); }

double hdiv_norm_squared(const FEField& f) {
  if (f.space->family() != Family::RT1) throw FEError("H(div) norm needs an RT1 field");
  return l2_norm_squared(f) +
         integrate_cells(f, [&](int t, const CellGeometry& g, const std::array<double, 3>& b) {
           const double d = f.divergence(t, g.map(b));
           return d * d;
         });
}

double integrate(const FEField& f) {
  if (f.space->family() == Family::RT1) throw FEError("integrate expects a scalar field");
  return integrate_cells(f, [&](int t, const CellGeometry&, const std::array<double, 3>& b) {
    return f.value(t, b);
  });
}

double l2_error_squared(const FEField& f, const ScalarFunction& exact) {
  if (f.space->family() == Family::RT1) throw FEError("scalar error of an RT1 field");
  return integrate_cells(f, [&](int t, const CellGeometry& g, const std::array<double, 3>& b) {
    const double d = f.value(t, b) - exact(g.map(b));
    return d * d;
  });
}

double l2_error_squared(const FEField& f, const VectorFunction& exact) {
  if (f.space->family() != Family::RT1) throw FEError("vector error of a scalar field");
  return integrate_cells(f, [&](int t, const CellGeometry& g, const std::array<double, 3>& b) {
    const Point x = g.map(b);
    return (f.vector_value(t, x) - exact(x)).squaredNorm();
  });
}

}  // namespace chf
