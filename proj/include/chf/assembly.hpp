#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "chf/fe_spaces.hpp"
#include "chf/linalg.hpp"
#include "chf/model.hpp"
#include "chf/quadrature.hpp"

namespace chf {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// RT1 shape functions tabulated at the volume quadrature points of every
/// cell and at the edge quadrature points of every boundary edge.
struct RTTables {
  struct BoundaryEdge {
    int cell = -1;
    int local_edge = -1;
    double length = 0.0;
    Vec2 normal;  // outward
    std::vector<std::array<double, 3>> bary;  // barycentric coords of the edge points in `cell`
    std::vector<RTShape> shape;
  };

  int n_quad = 0;
  std::vector<RTShape> volume;  // [cell * n_quad + q]
  std::vector<BoundaryEdge> boundary;

  const RTShape& at(int cell, int q) const { return volume[static_cast<std::size_t>(cell) * n_quad + q]; }
};

RTTables tabulate_rt(const FESpace& rt);

enum class BilinearForm {
  Mass,               ///< (u, w) on CG1, DG1 or RT1
  Stiffness,          ///< (grad u, grad w) on CG1
  WeightedStiffness,  ///< (k(c) grad u, grad w) on CG1, k evaluated at a CG1 coefficient c
  Divergence,         ///< (div u, q): trial RT1, test DG1
  HdivGram,           ///< (u, w) + (div u, div w) on RT1
};

/// Matrix with entry (i, j) = form(trial basis j, test basis i).
SparseMatrix assemble_bilinear(BilinearForm form, const FESpace& trial, const FESpace& test,
                               const FEField* coefficient = nullptr, const ParamFn& weight = {});

/// (div v, q_k) for every DG1 basis function q_k.
Vector assemble_divergence_residual(const FEField& v, const FESpace& dg);

/// Offsets of the unknown blocks [phi, mu, v, p] in the coupled vector.
struct BlockLayout {
  Eigen::Index phi = 0, mu = 0, v = 0, p = 0, size = 0;
  Eigen::Index n_cg = 0, n_rt = 0, n_dg = 0;
};

/// Residual and exact Jacobian of one step of the fully discrete scheme.
///
/// Unknowns x = (phi^{n+1}, mu^{n+1}, v^{n+1}, p^{n+1}); every parameter
/// function and the transported phi are evaluated at phi^n, which is fixed
/// with set_previous(). Rows are ordered as the four variational equations:
///   (d_t phi, psi) - (phi^n v, grad psi) + g (phi^n v.n, psi)_bd
///       + (m grad mu, grad psi) - (G_phi, psi)
///   (mu, xi) - eps2 (grad phi, grad xi) - (psi'_av, xi)
///   ((alpha + beta |v|^{s-1}) v, w) - (p, div w) + (phi^n grad mu, w)
///       + g (phi^n mu, div w) - g (phi^n mu, w.n)_bd
///   (div v, q) - (G_v, q)
class CoupledAssembler {
 public:
  CoupledAssembler(std::shared_ptr<const Mesh> mesh, ModelParams params);

  const BlockLayout& layout() const { return layout_; }
  const ModelParams& params() const { return params_; }
  const std::shared_ptr<const FESpace>& cg() const { return cg_; }
  const std::shared_ptr<const FESpace>& rt() const { return rt_; }
  const std::shared_ptr<const FESpace>& dg() const { return dg_; }
  const RTTables& rt_tables() const { return tables_; }

  /// Freezes phi^n and re-evaluates all parameter functions at it.
  void set_previous(const Vector& phi_old);
  const Vector& previous() const { return phi_old_; }

  Vector residual(const Vector& x) const;
  SparseMatrix jacobian(const Vector& x) const;

  /// Jacobian regularization: |v| -> sqrt(|v|^2 + delta^2) in the
  /// Forchheimer derivative only.
  static constexpr double kJacobianDelta = 1e-12;

 private:
  struct QuadCache {
    double phi_old, alpha, beta, mobility, gamma_phi, gamma_v;
  };
  void assemble(const Vector& x, Vector* res, std::vector<Eigen::Triplet<double>>* trip) const;

  ModelParams params_;
  std::shared_ptr<const Mesh> mesh_;
  std::shared_ptr<const FESpace> cg_, rt_, dg_;
  RTTables tables_;
  BlockLayout layout_;
  std::vector<CellGeometry> geom_;
  Vector phi_old_;
  std::vector<QuadCache> cache_;  // [cell * n_quad + q]
};

}  // namespace chf
