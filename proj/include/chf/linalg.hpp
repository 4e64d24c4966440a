#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

namespace chf {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

class LinearSolveError : public std::runtime_error {
 public:
  LinearSolveError(const std::string& what, long index = -1)
      : std::runtime_error(what), index_(index) {}
  /// offending row/column, -1 if unknown
  long index() const { return index_; }

 private:
  long index_;
};

/// Sparse direct solve. Guarantees ||Ax - b||_inf <= 1e-10 max(1, ||b||_inf),
/// applying one step of iterative refinement when the first solve misses it.
Vector lu_solve(const SparseMatrix& A, const Vector& b);

struct NewtonConfig {
  double abs_tol = 1e-11;
  int max_iterations = 50;
  /// backtracking halves the step while the residual grows, down to this length
  double min_step = 1.0 / 256.0;

  void validate() const;
};

struct NewtonTrace {
  /// residual infinity norm before the first and after every iteration
  std::vector<double> residual_norms;
  std::vector<double> step_lengths;
  bool converged = false;

  int iterations() const { return static_cast<int>(step_lengths.size()); }
};

class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, NewtonTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const NewtonTrace& trace() const { return trace_; }

 private:
  NewtonTrace trace_;
};

struct NewtonResult {
  Vector x;
  NewtonTrace trace;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<SparseMatrix(const Vector&)>;

/// Damped Newton iteration on R(x) = 0 with absolute tolerance on ||R||_inf.
/// Throws NewtonFailure carrying the trace when max_iterations is exhausted or
/// the residual becomes non-finite.
NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector x0,
                          const NewtonConfig& cfg = {});

}  // namespace chf
