#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chf/linalg.hpp"

using namespace chf;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& D) { return D.sparseView(); }

}  // namespace

TEST(LuSolve, Identity) {
  SparseMatrix I(5, 5);
  I.setIdentity();
  Vector b(5);
  b << 1, -2, 3, 0.5, 7;
  EXPECT_LE((lu_solve(I, b) - b).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(LuSolve, Diagonal2x2) {
  Eigen::MatrixXd D(2, 2);
  D << 2, 0, 0, 4;
  const Vector x = lu_solve(from_dense(D), Vector::Map(std::vector<double>{2.0, 8.0}.data(), 2));
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 2.0);
}

TEST(LuSolve, RandomSPDResidualBound) {
  std::mt19937 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd G(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) G(i, j) = n(rng);
  const Eigen::MatrixXd A = G * G.transpose() + 1e-2 * Eigen::MatrixXd::Identity(50, 50);
  Vector b(50);
  for (auto& c : b) c = 100.0 * n(rng);
  const SparseMatrix As = from_dense(A);
  const Vector x = lu_solve(As, b);
  EXPECT_LE((As * x - b).lpNorm<Eigen::Infinity>(), 1e-10 * std::max(1.0, b.lpNorm<Eigen::Infinity>()));
}

TEST(LuSolve, SingularReportsColumn) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(4, 4);
  D(2, 2) = 0.0;
  try {
    lu_solve(from_dense(D), Vector::Ones(4));
    FAIL() << "singular matrix accepted";
  } catch (const LinearSolveError& e) {
    EXPECT_EQ(e.index(), 2);
  }
}

TEST(LuSolve, ShapeErrors) {
  SparseMatrix A(3, 2);
  EXPECT_THROW(lu_solve(A, Vector::Zero(3)), LinearSolveError);
  SparseMatrix B(3, 3);
  B.setIdentity();
  EXPECT_THROW(lu_solve(B, Vector::Zero(2)), LinearSolveError);
}

namespace {

SparseMatrix scalar(double v) {
  SparseMatrix J(1, 1);
  J.insert(0, 0) = v;
  return J;
}

}  // namespace

TEST(Newton, LinearProblemOneIteration) {
  const auto r = newton_solve([](const Vector& x) { return x; }, [](const Vector&) { return scalar(1.0); },
                              Vector::Constant(1, 5.0));
  EXPECT_EQ(r.trace.iterations(), 1);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_EQ(r.x[0], 0.0);
}

TEST(Newton, QuadraticConvergenceOnScalar) {
  const auto r = newton_solve([](const Vector& x) { return Vector::Constant(1, x[0] * x[0] - 4.0); },
                              [](const Vector& x) { return scalar(2.0 * x[0]); }, Vector::Constant(1, 3.0));
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  // independent oracle: the classical iterates x <- (x + 4/x)/2
  double x = 3.0;
  std::vector<double> err;
  for (int i = 0; i < r.trace.iterations(); ++i) {
    err.push_back(std::abs(x - 2.0));
    x = 0.5 * (x + 4.0 / x);
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    if (err[i] < 1e-4) break;
    EXPECT_LE(err[i + 1], 0.25 * err[i] * err[i] + 1e-15);
  }
  const auto& res = r.trace.residual_norms;
  ASSERT_GE(res.size(), 4u);
  const std::size_t n = res.size();
  EXPECT_LT(res[n - 2] / res[n - 3], res[n - 3] / res[n - 4]);
}

TEST(Newton, ConvergedStartNeedsNoIteration) {
  const auto r = newton_solve([](const Vector& x) { return Vector::Constant(1, x[0] * x[0] - 4.0); },
                              [](const Vector& x) { return scalar(2.0 * x[0]); }, Vector::Constant(1, 2.0));
  EXPECT_EQ(r.trace.iterations(), 0);
  EXPECT_TRUE(r.trace.converged);
}

TEST(Newton, FailureCarriesTrace) {
  NewtonConfig cfg;
  cfg.max_iterations = 3;
  try {
    newton_solve([](const Vector& x) { return Vector::Constant(1, std::atan(x[0]) + 2.0); },
                 [](const Vector& x) { return scalar(1.0 / (1.0 + x[0] * x[0])); }, Vector::Constant(1, 0.0), cfg);
    FAIL() << "no root exists";
  } catch (const NewtonFailure& e) {
    EXPECT_FALSE(e.trace().converged);
    EXPECT_FALSE(e.trace().residual_norms.empty());
  }
}

TEST(Newton, NonFiniteResidualFails) {
  EXPECT_THROW(newton_solve([](const Vector& x) { return Vector::Constant(1, std::log(x[0])); },
                            [](const Vector& x) { return scalar(1.0 / x[0]); }, Vector::Constant(1, -1.0)),
               NewtonFailure);
}

TEST(Newton, BacktrackingDampsOvershoot) {
  // full Newton from x0 = 3 diverges on atan; damping recovers
  const auto r = newton_solve([](const Vector& x) { return Vector::Constant(1, std::atan(x[0])); },
                              [](const Vector& x) { return scalar(1.0 / (1.0 + x[0] * x[0])); },
                              Vector::Constant(1, 3.0));
  EXPECT_NEAR(r.x[0], 0.0, 1e-11);
  bool damped = false;
  for (double s : r.trace.step_lengths) damped = damped || s < 1.0;
  EXPECT_TRUE(damped);
}

TEST(Newton, Deterministic) {
  auto run = [] {
    return newton_solve(
        [](const Vector& x) {
          Vector r(2);
          r << x[0] * x[0] + x[1] - 3.0, x[0] - x[1] * x[1] * x[1];
          return r;
        },
        [](const Vector& x) {
          Eigen::MatrixXd J(2, 2);
          J << 2 * x[0], 1, 1, -3 * x[1] * x[1];
          return SparseMatrix(J.sparseView());
        },
        Vector::Constant(2, 1.5));
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.trace.residual_norms, b.trace.residual_norms);
}

TEST(NewtonConfig, Validation) {
  NewtonConfig c;
  EXPECT_NO_THROW(c.validate());
  c.abs_tol = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = NewtonConfig{};
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = NewtonConfig{};
  EXPECT_EQ(c.abs_tol, 1e-11);
  EXPECT_EQ(c.max_iterations, 50);
  EXPECT_EQ(c.min_step, 1.0 / 256.0);
}
