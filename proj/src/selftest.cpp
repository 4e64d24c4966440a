#include <cmath>
#include <random>

#include <fmt/format.h>

#include "chf/experiments.hpp"
#include "chf/quadrature.hpp"

namespace chf {

namespace {

SelftestResult inequality_suite(std::mt19937& rng, int pairs) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(-4.0, 2.0);
  int failures = 0;
  for (double s : {1.5, 2.0, 3.0}) {
    for (int i = 0; i < pairs; ++i) {
      const Vec2 x = Vec2(u(rng), u(rng)) * std::pow(10.0, mag(rng));
      const Vec2 y = Vec2(u(rng), u(rng)) * std::pow(10.0, mag(rng));
      if (!check_inequalities(x, y, s).holds()) ++failures;
    }
  }
  return {"inequalities", failures == 0, fmt::format("{} violations in {} pairs", failures, 3 * pairs)};
}

SelftestResult chain_rule(std::mt19937& rng) {
  auto mesh = std::make_shared<const Mesh>(build_level_mesh(1));
  auto cg = make_space(mesh, Family::CG1);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  const double tau = 5e-3;
  const auto& q = default_quadrature();
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector a(cg->ndofs()), b(cg->ndofs());
    for (auto& c : a) c = u(rng);
    for (auto& c : b) c = u(rng);
    const FEField old_f(cg, a), new_f(cg, b);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
      const double area = mesh->area(static_cast<int>(t));
      for (std::size_t k = 0; k < q.points.size(); ++k) {
        const double po = old_f.value(static_cast<int>(t), q.points[k]);
        const double pn = new_f.value(static_cast<int>(t), q.points[k]);
        lhs += q.weights[k] * area * psi_prime_av(pn, po) * (pn - po) / tau;
        rhs += q.weights[k] * area * (psi_quartic(pn) - psi_quartic(po)) / tau;
      }
    }
    worst = std::max(worst, std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)}));
  }
  return {"chain rule", worst <= 1e-12, fmt::format("max scaled defect {:.2e}", worst)};
}

SelftestResult jacobian_check(std::mt19937& rng) {
  auto mesh = std::make_shared<const Mesh>(build_level_mesh(1));
  ExperimentConfig cfg;
  cfg.gamma = 1;
  cfg.s = 3.0;
  CoupledAssembler A(mesh, make_model_params(cfg, 0.0));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& L = A.layout();
  double worst = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    Vector prev(L.n_cg);
    for (auto& c : prev) c = 0.5 + 0.5 * u(rng);
    A.set_previous(prev);
    Vector x(L.size), e(L.size);
    for (auto& c : x) c = u(rng);
    for (auto& c : e) c = u(rng);
    worst = std::max(worst, jacobian_fd_error(A, x, e, 1e-6));
  }
  return {"jacobian", worst <= 1e-5, fmt::format("max relative error {:.2e}", worst)};
}

}  // namespace

double jacobian_fd_error(const CoupledAssembler& A, const Vector& x, const Vector& e, double h) {
  const Vector fd = (A.residual(x + h * e) - A.residual(x - h * e)) / (2.0 * h);
  const Vector je = A.jacobian(x) * e;
  return (fd - je).norm() / std::max(je.norm(), 1e-300);
}

std::vector<SelftestResult> run_selftest(unsigned seed) {
  std::mt19937 rng(seed);
  return {inequality_suite(rng, 10000), chain_rule(rng), jacobian_check(rng)};
}

}  // namespace chf
