#include "chf/forchheimer.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace chf {

Vec2 forchheimer_nonlinearity(const Vec2& x, double s) {
  const double n = x.norm();
  if (n == 0.0) return Vec2::Zero();
  return std::pow(n, s - 1.0) * x;
}

namespace {

// |x|^{(1-s)/s} x, zero at the origin
Vec2 inverse_nonlinearity(const Vec2& x, double s) {
  const double n = x.norm();
  if (n == 0.0) return Vec2::Zero();
  return std::pow(n, (1.0 - s) / s) * x;
}

}  // namespace

InequalitySlacks check_inequalities(const Vec2& x, const Vec2& y, double s) {
  InequalitySlacks out;
  const double nx = x.norm();
  const double ny = y.norm();
  const double d = (x - y).norm();
  const Vec2 fx = forchheimer_nonlinearity(x, s);
  const Vec2 fy = forchheimer_nonlinearity(y, s);

  // | |x|^{s-1}x - |y|^{s-1}y | <= s 2^{s-1} (|x|^{s-1} + |y|^{s-1}) |x - y|
  const double lhs1 = (fx - fy).norm();
  const double rhs1 = s * std::pow(2.0, s - 1.0) * (std::pow(nx, s - 1.0) + std::pow(ny, s - 1.0)) * d;
  out.slack[0] = rhs1 - lhs1;
  out.scale[0] = std::max({lhs1, rhs1, 1e-300});

  // (|x|^{s-1}x - |y|^{s-1}y).(x - y) >= 2^{1-s} |x - y|^{s+1}
  const double lhs2 = (fx - fy).dot(x - y);
  const double rhs2 = std::pow(2.0, 1.0 - s) * std::pow(d, s + 1.0);
  out.slack[1] = lhs2 - rhs2;
  out.scale[1] = std::max({std::abs(lhs2), rhs2, 1e-300});

  // | |x|^{(1-s)/s}x - |y|^{(1-s)/s}y | <= 2^{1-1/s} |x - y|^{1/s}
  const Vec2 gx = inverse_nonlinearity(x, s);
  const Vec2 gy = inverse_nonlinearity(y, s);
  const double lhs3 = (gx - gy).norm();
  const double rhs3 = std::pow(2.0, 1.0 - 1.0 / s) * std::pow(d, 1.0 / s);
  out.slack[2] = rhs3 - lhs3;
  out.scale[2] = std::max({lhs3, rhs3, 1e-300});

  // |x - y|^2 / (|x|^{1-1/s} + |y|^{1-1/s}) <= s (x/|x|^{1-1/s} - y/|y|^{1-1/s}).(x - y), 0/0 = 0
  const double denom = std::pow(nx, 1.0 - 1.0 / s) + std::pow(ny, 1.0 - 1.0 / s);
  const double lhs4 = denom > 0.0 ? d * d / denom : 0.0;
  const double rhs4 = s * (gx - gy).dot(x - y);
  out.slack[3] = rhs4 - lhs4;
  out.scale[3] = std::max({lhs4, std::abs(rhs4), 1e-300});
  return out;
}

void ForchheimerProblem::validate() const {
  if (!(s > 1.0)) throw std::invalid_argument("Forchheimer exponent must exceed 1");
  if (!(alpha0 > 0.0) || !(beta0 > 0.0)) throw std::invalid_argument("alpha0 and beta0 must be positive");
  if (!alpha || !beta || !f || !g || !h) throw std::invalid_argument("Forchheimer data incomplete");
}

ForchheimerAssembler::ForchheimerAssembler(std::shared_ptr<const Mesh> mesh, ForchheimerProblem problem,
                                           std::optional<double> n_reg)
    : mesh_(std::move(mesh)), problem_(std::move(problem)), n_reg_(n_reg) {
  problem_.validate();
  if (n_reg_ && !(*n_reg_ > 0.0)) throw std::invalid_argument("regularization parameter must be positive");
  rt_ = make_space(mesh_, Family::RT1);
  dg_ = make_space(mesh_, Family::DG1);
  tables_ = tabulate_rt(*rt_);
  n_rt_ = static_cast<Eigen::Index>(rt_->ndofs());
  n_dg_ = static_cast<Eigen::Index>(dg_->ndofs());

  const auto& q = default_quadrature();
  quad_.reserve(mesh_->num_triangles() * q.points.size());
  for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
    const auto geo = cell_geometry(*mesh_, static_cast<int>(t));
    for (const auto& b : q.points) {
      const Point x = geo.map(b);
      QuadData d{problem_.alpha(x), problem_.beta(x), problem_.g(x), problem_.f(x)};
      if (d.alpha < problem_.alpha0 || d.beta < problem_.beta0) {
        throw std::invalid_argument("alpha or beta below its declared lower bound");
      }
      quad_.push_back(d);
    }
  }
  for (std::size_t bi = 0; bi < mesh_->boundary_edges.size(); ++bi) {
    const int e = mesh_->boundary_edges[bi];
    const Point a = mesh_->vertices[mesh_->edges[e][0]];
    const Point b = mesh_->vertices[mesh_->edges[e][1]];
    std::vector<double> hv;
    for (double s : q.edge_points) hv.push_back(problem_.h(a + s * (b - a)));
    boundary_h_.push_back(std::move(hv));
  }
}

Vector ForchheimerAssembler::residual(const Vector& x) const {
  Vector r;
  assemble(x, &r, nullptr);
  return r;
}

SparseMatrix ForchheimerAssembler::jacobian(const Vector& x) const {
  std::vector<Eigen::Triplet<double>> trip;
  assemble(x, nullptr, &trip);
  SparseMatrix J(size(), size());
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  return J;
}

void ForchheimerAssembler::assemble(const Vector& x, Vector* res,
                                    std::vector<Eigen::Triplet<double>>* trip) const {
  if (x.size() != size()) throw AssemblyError("Forchheimer state has wrong length");
  const auto& q = default_quadrature();
  const int nq = static_cast<int>(q.points.size());
  const double s = problem_.s;
  const double inv_n = n_reg_ ? 1.0 / *n_reg_ : 0.0;
  const double delta = kPressureDelta;
  const Mesh& m = *mesh_;
  if (res) *res = Vector::Zero(size());
  if (trip) trip->reserve(m.num_triangles() * 11 * 11);

  constexpr int N = 11;  // v 0-7, p 8-10
  std::array<Eigen::Index, N> gl{};
  for (std::size_t tt = 0; tt < m.num_triangles(); ++tt) {
    const int t = static_cast<int>(tt);
    const double area = m.area(t);
    const auto rd = rt_->cell_dofs(t);
    const auto pd = dg_->cell_dofs(t);
    for (int i = 0; i < 8; ++i) gl[i] = rd[i];
    for (int i = 0; i < 3; ++i) gl[8 + i] = n_rt_ + pd[i];
    Eigen::Matrix<double, N, 1> rl = Eigen::Matrix<double, N, 1>::Zero();
    Eigen::Matrix<double, N, N> jl = Eigen::Matrix<double, N, N>::Zero();

    for (int k = 0; k < nq; ++k) {
      const auto& b = q.points[k];
      const double w = q.weights[k] * area;
      const auto& sh = tables_.at(t, k);
      const auto& d = quad_[tt * nq + k];
      Vec2 v = Vec2::Zero();
      double div_v = 0.0;
      for (int i = 0; i < 8; ++i) {
        v += x[gl[i]] * sh.value[i];
        div_v += x[gl[i]] * sh.div[i];
      }
      double p = 0.0;
      for (int i = 0; i < 3; ++i) p += b[i] * x[gl[8 + i]];
      const double vn = v.norm();
      const double drag = d.alpha + d.beta * (vn > 0.0 ? std::pow(vn, s - 1.0) : 0.0);
      const double ad = std::abs(div_v);
      const double div_term = ad > 0.0 ? std::pow(ad, s - 1.0) * div_v : 0.0;
      const double preg = std::sqrt(p * p + delta * delta);
      const double c_term = std::pow(preg, (1.0 - s) / s) * p;

      if (res) {
        for (int j = 0; j < 8; ++j) {
          rl[j] += w * (drag * v.dot(sh.value[j]) - p * sh.div[j] - d.f.dot(sh.value[j]) +
                        inv_n * div_term * sh.div[j]);
        }
        for (int i = 0; i < 3; ++i) rl[8 + i] += w * (div_v - d.g + inv_n * c_term) * b[i];
      }
      if (trip) {
        const double vreg = std::sqrt(vn * vn + delta * delta);
        const double outer = (s - 1.0) * d.beta * std::pow(vreg, s - 3.0);
        const double ddiv = inv_n * s * (ad > 0.0 ? std::pow(ad, s - 1.0) : 0.0);
        const double dc = inv_n * std::pow(preg, (1.0 - s) / s) * (1.0 + (1.0 - s) / s * p * p / (preg * preg));
        for (int i = 0; i < 8; ++i) {
          const double vi = v.dot(sh.value[i]);
          for (int j = 0; j < 8; ++j) {
            jl(i, j) += w * (drag * sh.value[i].dot(sh.value[j]) + outer * vi * v.dot(sh.value[j]) +
                             ddiv * sh.div[i] * sh.div[j]);
          }
          for (int j = 0; j < 3; ++j) {
            jl(i, 8 + j) += -w * b[j] * sh.div[i];
            jl(8 + j, i) += w * b[j] * sh.div[i];
          }
        }
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) jl(8 + i, 8 + j) += w * dc * b[i] * b[j];
      }
    }
    if (res)
      for (int i = 0; i < N; ++i) (*res)[gl[i]] += rl[i];
    if (trip)
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          if (jl(i, j) != 0.0 || i == j) trip->emplace_back(gl[i], gl[j], jl(i, j));
  }

  // F(u) = (f, u) - (h, u.n)_bd moves to the left as +(h, u.n)_bd
  if (res) {
    const int ne = static_cast<int>(q.edge_points.size());
    for (std::size_t bi = 0; bi < tables_.boundary.size(); ++bi) {
      const auto& be = tables_.boundary[bi];
      const auto rd = rt_->cell_dofs(be.cell);
      for (int k = 0; k < ne; ++k) {
        const double w = q.edge_weights[k] * be.length * boundary_h_[bi][k];
        if (w == 0.0) continue;
        for (int j = 0; j < 8; ++j) (*res)[rd[j]] += w * be.shape[k].value[j].dot(be.normal);
      }
    }
  }
}

ForchheimerSolution solve_forchheimer(const ForchheimerProblem& problem, std::shared_ptr<const Mesh> mesh,
                                      std::optional<double> n_reg, const NewtonConfig& cfg, const Vector* x0) {
  ForchheimerAssembler A(mesh, problem, n_reg);
  Vector start = x0 ? *x0 : Vector::Zero(A.size());
  if (start.size() != A.size()) throw std::invalid_argument("initial guess has wrong length");
  auto result = newton_solve([&](const Vector& x) { return A.residual(x); },
                             [&](const Vector& x) { return A.jacobian(x); }, std::move(start), cfg);
  ForchheimerSolution sol{FEField(A.rt(), result.x.head(A.n_velocity())),
                          FEField(A.dg(), result.x.tail(A.size() - A.n_velocity())), std::move(result.trace)};
  return sol;
}

double inf_sup_constant(std::shared_ptr<const Mesh> mesh) {
  const auto rt = make_space(mesh, Family::RT1);
  const auto dg = make_space(mesh, Family::DG1);
  const SparseMatrix B = assemble_bilinear(BilinearForm::Divergence, *rt, *dg);
  const SparseMatrix X = assemble_bilinear(BilinearForm::HdivGram, *rt, *rt);
  const SparseMatrix MQ = assemble_bilinear(BilinearForm::Mass, *dg, *dg);

  Eigen::SimplicialLLT<SparseMatrix> chol(X);
  if (chol.info() != Eigen::Success) throw LinearSolveError("H(div) Gram matrix not positive definite");
  const Eigen::MatrixXd Bt = Eigen::MatrixXd(B.transpose());
  const Eigen::MatrixXd XinvBt = chol.solve(Bt);
  const Eigen::MatrixXd S = B * XinvBt;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::MatrixXd(MQ),
                                                               Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw LinearSolveError("generalized eigenproblem failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

}  // namespace chf
