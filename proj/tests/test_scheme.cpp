#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chf/diagnostics.hpp"
#include "chf/scheme.hpp"
#include "test_util.hpp"

using namespace chf;
using chf::testing::constant_params;
using chf::testing::exp1_params;
using chf::testing::level_mesh;

namespace {

Point to_point(const Mesh& m, int t, const std::array<double, 3>& b) {
  const auto& tri = m.triangles[t];
  return b[0] * m.vertices[tri[0]] + b[1] * m.vertices[tri[1]] + b[2] * m.vertices[tri[2]];
}

/// sum over cells and rule points of |K| w f(t, bary, x)
template <class F>
double integrate_cells(const Mesh& m, F f) {
  const auto& q = default_quadrature();
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t)
    for (std::size_t k = 0; k < q.points.size(); ++k)
      s += m.area(t) * q.weights[k] * f(t, q.points[k], to_point(m, t, q.points[k]));
  return s;
}

ScalarFunction exp1_phi0() { return initial_condition(InitialKind::Exp1, 1e-4); }

ModelParams no_source_params(int gamma) {
  ModelParams p = exp1_params(2.0, gamma);
  p.gamma_phi = [](double) { return 0.0; };
  p.gamma_v = [](double) { return 0.0; };
  return p;
}

}  // namespace

TEST(DoubleWell, Examples) {
  EXPECT_EQ(psi_quartic(0.0), 0.0);
  EXPECT_EQ(psi_quartic(1.0), 0.0);
  EXPECT_EQ(psi_prime_quartic(0.0), 0.0);
  EXPECT_EQ(psi_prime_quartic(1.0), 0.0);
  EXPECT_EQ(psi_prime_quartic(0.5), 0.0);
  EXPECT_DOUBLE_EQ(psi_quartic(0.5), 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(psi_prime_quartic(2.0), 3.0);
}

TEST(DoubleWell, DerivativesMatchFiniteDifferences) {
  for (double x : {-0.7, 0.1, 0.45, 1.3}) {
    const double h = 1e-5;
    EXPECT_NEAR((psi_quartic(x + h) - psi_quartic(x - h)) / (2 * h), psi_prime_quartic(x), 1e-9);
    EXPECT_NEAR((psi_prime_quartic(x + h) - psi_prime_quartic(x - h)) / (2 * h), psi_second_quartic(x), 1e-9);
  }
}

TEST(PsiPrimeAverage, Examples) {
  EXPECT_DOUBLE_EQ(psi_prime_av(0.3, 0.3), psi_prime_quartic(0.3));
  EXPECT_NEAR(psi_prime_av(1.0, 0.0), 0.0, 1e-16);
  EXPECT_NEAR(psi_prime_av(2.0, 0.0), 0.5, 1e-15);
}

TEST(PsiPrimeAverage, DiscreteChainRule) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(psi_prime_av(a, b) * (a - b), psi_quartic(a) - psi_quartic(b), 1e-12);
  }
}

TEST(PsiPrimeAverage, DerivativeMatchesFiniteDifferences) {
  for (double a : {-0.4, 0.2, 0.9}) {
    const double h = 1e-6, b = 0.35;
    EXPECT_NEAR((psi_prime_av(a + h, b) - psi_prime_av(a - h, b)) / (2 * h), psi_prime_av_derivative(a, b), 1e-8);
  }
}

TEST(ChfScheme, FlatStateIsEquilibrium) {
  for (int gamma : {0, 1}) {
    ModelParams p = no_source_params(gamma);
    p.T = 2 * p.tau;
    ChfScheme sch(level_mesh(2), p);
    const auto traj = sch.run(sch.initial_state(ScalarFunction([](const Point&) { return 0.5; })));
    ASSERT_EQ(traj.size(), 3u);
    for (const auto& s : traj) {
      EXPECT_LE((s.phi.coeffs.array() - 0.5).abs().maxCoeff(), 1e-13);
      EXPECT_LE(s.mu.coeffs.lpNorm<Eigen::Infinity>(), 1e-13);
      EXPECT_LE(s.v.coeffs.lpNorm<Eigen::Infinity>(), 1e-13);
      EXPECT_LE(s.p.coeffs.lpNorm<Eigen::Infinity>(), 1e-13);
    }
  }
}

TEST(ChfScheme, StepCountAndTimes) {
  ModelParams p = exp1_params(2.0, 0);
  p.T = 2 * p.tau;
  ChfScheme sch(level_mesh(1), p);
  int calls = 0;
  const auto traj = sch.run(sch.initial_state(exp1_phi0()), [&](const auto&, const auto&, int, const auto&) { ++calls; });
  ASSERT_EQ(traj.size(), 3u);
  EXPECT_EQ(calls, 2);
  EXPECT_DOUBLE_EQ(traj[1].t, p.tau);
  EXPECT_DOUBLE_EQ(traj[2].t, 2 * p.tau);
  const auto ends = sch.run(sch.initial_state(exp1_phi0()), {}, false);
  ASSERT_EQ(ends.size(), 2u);
  EXPECT_EQ(ends[1].phi.coeffs, traj[2].phi.coeffs);
}

TEST(ChfScheme, InitialStateInterpolates) {
  ChfScheme sch(level_mesh(1), exp1_params(2.0, 0));
  const auto s0 = sch.initial_state(ScalarFunction([](const Point& x) { return x[0] + x[1]; }));
  EXPECT_EQ(s0.t, 0.0);
  EXPECT_EQ(s0.mu.coeffs.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_NEAR(s0.phi.value_at(Point(1.0, 1.0)), 2.0, 1e-14);
  EXPECT_EQ(sch.unpack(0.0, sch.pack(s0)).phi.coeffs, s0.phi.coeffs);
}

class StepBalance : public ::testing::TestWithParam<std::tuple<double, int>> {};

TEST_P(StepBalance, MassEnergyAndConstraint) {
  const auto [s, gamma] = GetParam();
  ModelParams p = exp1_params(s, gamma);
  p.T = 3 * p.tau;
  auto mesh = level_mesh(2);
  ChfScheme sch(mesh, p);
  const auto traj = sch.run(sch.initial_state(exp1_phi0()));
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
    const auto& a = traj[n];
    const auto& b = traj[n + 1];
    if (gamma == 0) {
      // mass balance against a direct cell quadrature
      const double lhs = integrate_cells(*mesh, [&](int t, const auto& bc, const Point&) {
        return b.phi.value(t, bc) - a.phi.value(t, bc) - p.tau * p.gamma_phi(a.phi.value(t, bc));
      });
      EXPECT_LE(std::abs(lhs), 1e-11);
    }
    EXPECT_LE(std::abs(mass_defect(a, b, p)), 1e-11);

    // with an exact chain rule the energy defect is -(eps2/2) |grad(phi^{n+1} - phi^n)|^2
    const double dE = energy_defect(a, b, p);
    const double expect = -0.5 * p.eps2 * h1_seminorm_squared(FEField(b.phi.space, b.phi.coeffs - a.phi.coeffs));
    EXPECT_LE(dE, 1e-9 * std::max(1.0, std::abs(energy(b.phi, p))));
    EXPECT_NEAR(dE, expect, 1e-9);

    // (div v - G_v(phi^n), lambda_i) on every cell
    double worst = 0.0;
    const auto& q = default_quadrature();
    for (int t = 0; t < static_cast<int>(mesh->num_triangles()); ++t)
      for (int i = 0; i < 3; ++i) {
        double r = 0.0;
        for (std::size_t k = 0; k < q.points.size(); ++k) {
          const Point x = to_point(*mesh, t, q.points[k]);
          r += mesh->area(t) * q.weights[k] * (b.v.divergence(t, x) - p.gamma_v(a.phi.value(t, q.points[k]))) *
               q.points[k][i];
        }
        worst = std::max(worst, std::abs(r));
      }
    EXPECT_LE(worst, 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Regimes, StepBalance,
                         ::testing::Combine(::testing::Values(1.5, 2.0, 3.0), ::testing::Values(0, 1)));

TEST(ChfScheme, MassIncreasesWithoutBoundaryFlux) {
  ModelParams p = exp1_params(2.0, 0);
  p.T = 10 * p.tau;
  ChfScheme sch(level_mesh(2), p);
  const auto traj = sch.run(sch.initial_state(exp1_phi0()));
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) EXPECT_GT(mass(traj[n + 1].phi), mass(traj[n].phi));
}

TEST(ChfScheme, MassConservedForMeanFreeSource) {
  ModelParams p = constant_params(1.0, 1.0, 1.0, 0);
  p.eps2 = 1e-3;
  p.T = 5 * p.tau;
  p.gamma_v = [](double phi) { return phi - 0.5; };
  ChfScheme sch(level_mesh(2), p);
  const auto traj = sch.run(sch.initial_state(ScalarFunction([](const Point& x) {
    return 0.5 + 0.3 * std::cos(M_PI * x[0]) * std::cos(M_PI * x[1]);
  })));
  for (const auto& st : traj) EXPECT_NEAR(mass(st.phi), mass(traj[0].phi), 1e-11);
}

TEST(ChfScheme, UniqueFromTwoInitialGuesses) {
  for (int gamma : {0, 1}) {
    ChfScheme sch(level_mesh(2), exp1_params(2.0, gamma));
    const auto s0 = sch.initial_state(exp1_phi0());
    const auto a = sch.step(s0);
    const Vector zero = Vector::Zero(sch.assembler().layout().size);
    const auto b = sch.step(s0, &zero);
    EXPECT_LE((sch.pack(a.state) - sch.pack(b.state)).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_LE(relative_energy(a.state.phi, b.state.phi, sch.params()), 1e-16);
  }
}

TEST(ChfScheme, ConvergedGuessNeedsNoIteration) {
  ChfScheme sch(level_mesh(1), exp1_params(2.0, 1));
  const auto s0 = sch.initial_state(exp1_phi0());
  const auto a = sch.step(s0);
  const Vector x = sch.pack(a.state);
  const auto b = sch.step(s0, &x);
  EXPECT_EQ(b.trace.iterations(), 0);
}

TEST(ChfScheme, StepFailureCarriesIndex) {
  ModelParams p = exp1_params(2.0, 0);
  p.T = 3 * p.tau;
  NewtonConfig cfg;
  cfg.max_iterations = 1;
  ChfScheme sch(level_mesh(1), p, cfg);
  try {
    sch.run(sch.initial_state(exp1_phi0()));
    FAIL() << "one Newton iteration should not converge";
  } catch (const StepFailure& e) {
    EXPECT_EQ(e.step(), 1);
    EXPECT_FALSE(e.trace().converged);
  }
}

TEST(ChfScheme, PressureConvention) {
  EXPECT_STREQ(pressure_convention(1), "p");
  EXPECT_STREQ(pressure_convention(0), "p-phi*mu");
}

TEST(ChfScheme, Deterministic) {
  ModelParams p = exp1_params(3.0, 1);
  p.T = 2 * p.tau;
  ChfScheme a(level_mesh(1), p), b(level_mesh(1), p);
  const auto ta = a.run(a.initial_state(exp1_phi0()));
  const auto tb = b.run(b.initial_state(exp1_phi0()));
  EXPECT_EQ(a.pack(ta.back()), b.pack(tb.back()));
}
