#include "chf/linalg.hpp"

#include <cmath>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace chf {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

[[noreturn]] void report_singular(const LU& lu) {
  const std::string msg = lu.lastErrorMessage();
  const auto pos = msg.find_last_of(' ');
  long col = -1;
  if (pos != std::string::npos && pos + 1 < msg.size()) {
    try {
      const long permuted = std::stol(msg.substr(pos + 1)) - 1;
      const auto& perm = lu.colsPermutation().indices();
      for (Eigen::Index j = 0; j < perm.size(); ++j)
        if (perm[j] == permuted) col = static_cast<long>(j);
    } catch (const std::exception&) {
    }
  }
  if (col >= 0) throw LinearSolveError("singular matrix: zero pivot in column " + std::to_string(col), col);
  throw LinearSolveError("matrix factorization failed: " + msg);
}

}  // namespace

Vector lu_solve(const SparseMatrix& A, const Vector& b) {
  if (A.rows() != A.cols()) throw LinearSolveError("matrix is not square");
  if (A.rows() != b.size()) throw LinearSolveError("right-hand side has wrong length");
  if (A.rows() == 0) return Vector();

  SparseMatrix Ac = A;
  Ac.makeCompressed();
  LU lu;
  lu.compute(Ac);
  if (lu.info() != Eigen::Success) report_singular(lu);

  Vector x = lu.solve(b);
  const double bound = 1e-10 * std::max(1.0, inf_norm(b));
  Vector r = b - Ac * x;
  if (!(inf_norm(r) <= bound)) {
    x += lu.solve(r);
    r = b - Ac * x;
    if (!(inf_norm(r) <= bound)) {
      throw LinearSolveError("residual " + std::to_string(inf_norm(r)) + " above bound after refinement");
    }
  }
  return x;
}

void NewtonConfig::validate() const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("Newton needs at least one iteration");
  if (!(min_step > 0.0 && min_step <= 1.0)) throw std::invalid_argument("Newton min_step must lie in (0,1]");
}

NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector x0,
                          const NewtonConfig& cfg) {
  cfg.validate();
  NewtonResult out{std::move(x0), {}};
  Vector& x = out.x;
  NewtonTrace& trace = out.trace;

  Vector r = residual(x);
  double norm = inf_norm(r);
  trace.residual_norms.push_back(norm);
  if (!std::isfinite(norm)) throw NewtonFailure("non-finite initial residual", trace);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (norm <= cfg.abs_tol) break;
    const Vector dx = lu_solve(jacobian(x), -r);

    double step = 1.0;
    Vector trial = x + dx;
    Vector r_trial = residual(trial);
    double trial_norm = inf_norm(r_trial);
    while (!(trial_norm < norm) && step > cfg.min_step) {
      step *= 0.5;
      trial = x + step * dx;
      r_trial = residual(trial);
      trial_norm = inf_norm(r_trial);
    }
    x = std::move(trial);
    r = std::move(r_trial);
    norm = trial_norm;
    trace.step_lengths.push_back(step);
    trace.residual_norms.push_back(norm);
    if (!std::isfinite(norm)) throw NewtonFailure("non-finite residual", trace);
  }
  trace.converged = norm <= cfg.abs_tol;
  if (!trace.converged) {
    throw NewtonFailure("Newton did not converge in " + std::to_string(cfg.max_iterations) +
                            " iterations (residual " + std::to_string(norm) + ")",
                        trace);
  }
  return out;
}

}  // namespace chf
