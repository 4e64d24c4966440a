#pragma once

#include <memory>
#include <optional>

#include "chf/assembly.hpp"
#include "chf/fe_spaces.hpp"
#include "chf/linalg.hpp"

namespace chf {

/// |x|^{s-1} x with the convention |0|^{s-1} 0 = 0.
Vec2 forchheimer_nonlinearity(const Vec2& x, double s);

/// Slacks of the four monotonicity/continuity inequalities for |x|^{s-1}x and
/// |x|^{(1-s)/s}x; each inequality holds when slack >= -1e-12 * scale.
struct InequalitySlacks {
  std::array<double, 4> slack{};
  std::array<double, 4> scale{};

  bool holds(double rel_tol = 1e-12) const {
    for (int i = 0; i < 4; ++i)
      if (slack[i] < -rel_tol * scale[i]) return false;
    return true;
  }
};

InequalitySlacks check_inequalities(const Vec2& x, const Vec2& y, double s);

/// beta |v|^{s-1} v + alpha v + grad p = f,  div v = g,  p = h on the boundary.
struct ForchheimerProblem {
  double s = 2.0;
  /// declared lower bounds of alpha and beta
  double alpha0 = 1.0;
  double beta0 = 1.0;
  ScalarFunction alpha = [](const Point&) { return 1.0; };
  ScalarFunction beta = [](const Point&) { return 1.0; };
  VectorFunction f = [](const Point&) { return Vec2::Zero().eval(); };
  ScalarFunction g = [](const Point&) { return 0.0; };
  ScalarFunction h = [](const Point&) { return 0.0; };

  void validate() const;
};

/// Discrete mixed residual over RT1 x DG1, optionally with the regularizing
/// forms (1/n)(|div v|^{s-1} div v, div u) and (1/n)(|p|^{(1-s)/s} p, q).
class ForchheimerAssembler {
 public:
  ForchheimerAssembler(std::shared_ptr<const Mesh> mesh, ForchheimerProblem problem,
                       std::optional<double> n_reg = std::nullopt);

  Eigen::Index n_velocity() const { return n_rt_; }
  Eigen::Index size() const { return n_rt_ + n_dg_; }
  const std::shared_ptr<const FESpace>& rt() const { return rt_; }
  const std::shared_ptr<const FESpace>& dg() const { return dg_; }

  Vector residual(const Vector& x) const;
  SparseMatrix jacobian(const Vector& x) const;

  /// Guard in |p|^{(1-s)/s}: |p| -> sqrt(p^2 + delta^2).
  static constexpr double kPressureDelta = 1e-12;

 private:
  void assemble(const Vector& x, Vector* res, std::vector<Eigen::Triplet<double>>* trip) const;

  std::shared_ptr<const Mesh> mesh_;
  ForchheimerProblem problem_;
  std::optional<double> n_reg_;
  std::shared_ptr<const FESpace> rt_, dg_;
  RTTables tables_;
  Eigen::Index n_rt_ = 0, n_dg_ = 0;
  struct QuadData {
    double alpha, beta, g;
    Vec2 f;
  };
  std::vector<QuadData> quad_;
  std::vector<std::vector<double>> boundary_h_;
};

struct ForchheimerSolution {
  FEField v;
  FEField p;
  NewtonTrace trace;
};

ForchheimerSolution solve_forchheimer(const ForchheimerProblem& problem, std::shared_ptr<const Mesh> mesh,
                                      std::optional<double> n_reg = std::nullopt,
                                      const NewtonConfig& cfg = {}, const Vector* x0 = nullptr);

/// Smallest generalized singular value of the constraint block (div v, q)
/// with respect to the H(div) norm on RT1 and the L2 norm on DG1.
double inf_sup_constant(std::shared_ptr<const Mesh> mesh);

}  // namespace chf
