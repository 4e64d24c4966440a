#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "chf/mesh.hpp"

namespace chf {

using Vec2 = Eigen::Vector2d;
using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Vec2(const Point&)>;

/// V_h (continuous P1), X_h (Raviart-Thomas of order one), Q_h (discontinuous P1).
enum class Family { CG1, RT1, DG1 };

const char* family_name(Family f);

class FEError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Affine data of one triangle.
struct CellGeometry {
  std::array<Point, 3> vertices;
  std::array<Vec2, 3> grad_lambda;
  double area = 0.0;

  Point map(const std::array<double, 3>& bary) const {
    return bary[0] * vertices[0] + bary[1] * vertices[1] + bary[2] * vertices[2];
  }
  std::array<double, 3> barycentric(const Point& x) const;
};

CellGeometry cell_geometry(const Mesh& mesh, int t);

/// Values and divergences of the eight RT1 shape functions at one point.
struct RTShape {
  std::array<Vec2, 8> value;
  std::array<double, 8> div;
};

/// Degrees of freedom of one element family on a mesh.
///
/// RT1 layout: two normal moments per edge, (1/|e|) int_e (v.n_e) l_j ds
/// against the edge's linear Lagrange functions (j = 0 at the low vertex),
/// global indices 2e and 2e+1; then two interior moments (1/|K|) int_K v_x,
/// v_y at 2*num_edges + 2t + {0,1}. Local cell order: edges 0..2 (two dofs
/// each) followed by the two interior dofs. DG1 stores vertex values per cell
/// at 3t + i; CG1 stores vertex values.
class FESpace {
 public:
  FESpace(std::shared_ptr<const Mesh> mesh, Family family);

  Family family() const { return family_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  std::size_t ndofs() const { return ndofs_; }
  int dofs_per_cell() const { return dofs_per_cell_; }
  std::span<const int> cell_dofs(int t) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(t) * dofs_per_cell_,
            static_cast<std::size_t>(dofs_per_cell_)};
  }
  /// RT1: +1 when the dof's edge normal points out of cell t (interior dofs +1).
  int dof_sign(int t, int local) const;

  /// RT1 shape functions of cell t at physical point x.
  RTShape rt_shape(int t, const Point& x) const;

 private:
  void build_rt_basis();

  std::shared_ptr<const Mesh> mesh_;
  Family family_;
  std::size_t ndofs_ = 0;
  int dofs_per_cell_ = 0;
  std::vector<int> cell_dofs_;
  // RT1: shape function i on cell t is sum_m coef(m,i) P_m((x - centre)/scale)
  std::vector<Eigen::Matrix<double, 8, 8>> rt_coef_;
  std::vector<Point> rt_centre_;
  std::vector<double> rt_scale_;
};

std::shared_ptr<const FESpace> make_space(std::shared_ptr<const Mesh> mesh, Family family);

/// Coefficient vector over an FESpace.
struct FEField {
  std::shared_ptr<const FESpace> space;
  Eigen::VectorXd coeffs;

  FEField() = default;
  explicit FEField(std::shared_ptr<const FESpace> s)
      : space(std::move(s)), coeffs(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space->ndofs()))) {}
  FEField(std::shared_ptr<const FESpace> s, Eigen::VectorXd c) : space(std::move(s)), coeffs(std::move(c)) {}

  /// CG1/DG1 value in cell t at barycentric coordinates.
  double value(int t, const std::array<double, 3>& bary) const;
  /// CG1/DG1 gradient in cell t.
  Vec2 gradient(int t) const;
  /// RT1 value in cell t at physical point x.
  Vec2 vector_value(int t, const Point& x) const;
  /// RT1 divergence in cell t at physical point x.
  double divergence(int t, const Point& x) const;
  /// Point evaluation anywhere in the domain (linear search, for tests and output).
  double value_at(const Point& x) const;
  Vec2 vector_value_at(const Point& x) const;
};

FEField interpolate(std::shared_ptr<const FESpace> space, const ScalarFunction& f);
FEField interpolate(std::shared_ptr<const FESpace> space, const VectorFunction& f);

/// RT1 interpolation of a field given cell by cell (the cell index refers to
/// the target mesh); used for discontinuous inputs whose normal trace is
/// single valued.
FEField interpolate_rt_cellwise(std::shared_ptr<const FESpace> space,
                                const std::function<Vec2(int, const Point&)>& f);

/// Raviart-Thomas projection of an analytic field. `required_degree` is the
/// polynomial degree the caller needs integrated exactly; anything above the
/// built-in rule is rejected.
FEField rt_project(const VectorFunction& v, std::shared_ptr<const FESpace> target,
                   int required_degree = 0);

/// Raviart-Thomas projection of an RT1 field living on the uniform refinement
/// of the target mesh. Moments are integrated piecewise over the children.
FEField rt_project(const FEField& fine, std::shared_ptr<const FESpace> target);

/// Divergence of an RT1 field as a DG1 field on the same mesh.
FEField divergence_field(const FEField& v);

/// Exact representation of a coarse field on the uniformly refined mesh.
FEField prolong(const FEField& coarse, std::shared_ptr<const FESpace> fine_space);

/// Discrete Laplacian: (L, psi) = -(grad phi, grad psi) for all psi in V_h,
/// returned with zero mean.
FEField discrete_laplacian(const FEField& phi);

// Squared norms, integrated with the default rule.
double l2_norm_squared(const FEField& f);
double h1_seminorm_squared(const FEField& f);
double h1_norm_squared(const FEField& f);
/// ||v||^2 + ||div v||^2 for RT1 fields
double hdiv_norm_squared(const FEField& f);
double integrate(const FEField& f);
/// ||f - exact||^2 in L2
double l2_error_squared(const FEField& f, const ScalarFunction& exact);
double l2_error_squared(const FEField& f, const VectorFunction& exact);

}  // namespace chf
