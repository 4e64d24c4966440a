#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chf/config.hpp"
#include "chf/diagnostics.hpp"
#include "chf/forchheimer.hpp"
#include "chf/scheme.hpp"

namespace chf {

/// 1/2 - 1/2 tanh((sqrt(1.1(x-1/2)^2 + 0.8(y-c)^2) - 1/4) / sqrt(10 eps2)),
/// c = 1/2 for Exp1 and 3/4 for Exp2; Flat is the constant 1/2.
ScalarFunction initial_condition(InitialKind which, double eps2);

/// Model functions of the configured experiment. `initial_mass` is (phi_0, 1)
/// and enters only the consistent volume source phi - (phi_0, 1).
ModelParams make_model_params(const ExperimentConfig& cfg, double initial_mass);
NewtonConfig make_newton_config(const ExperimentConfig& cfg);

struct RunSummary {
  BalanceReport report;
  TimeStepState final_state;
  int newton_iterations = 0;
  double max_phi = 0.0;
};

struct RunOptions {
  /// write ledger.csv and VTK snapshots below cfg.outdir
  bool write_output = true;
  std::function<void(int step, const BalanceRow& row, const NewtonTrace& trace)> on_step;
};

/// Single run on mesh level cfg.level up to cfg.T. Throws StepFailure.
RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct ConvergenceRow {
  int k = 0;
  double h = 0.0;
  /// phi, mu, v, p
  std::array<double, 4> err{};
  std::array<std::optional<double>, 4> eoc{};
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
};

/// log2(coarse / fine), undefined when either error is zero.
std::optional<double> eoc(double coarse, double fine);

/// Runs levels k_min..k_max with shared tau and T; row k compares level k with
/// level k+1 after prolongation. Only two trajectories are held at a time.
ConvergenceReport convergence_study(const ExperimentConfig& cfg,
                                    const std::function<void(const std::string&)>& log = {});

/// Differences of two trajectories on the same fine space:
/// max_n |phi|_H1^2, tau sum |mu|_H1^2, tau sum |v|_Hdiv^2, tau sum |p|^2 (n >= 1 for the sums).
std::array<double, 4> trajectory_errors(const std::vector<TimeStepState>& a, const std::vector<TimeStepState>& b,
                                        double tau);

/// Prolongs every field of a state to the given fine spaces.
TimeStepState prolong_state(const TimeStepState& s, const ChfScheme& fine);

/// Smooth Forchheimer solution v = (y(1-y) + x^2, xy), p = x(1-x)y(1-y) with
/// its data f, g and h = 0 for constant alpha, beta.
struct ManufacturedForchheimer {
  ForchheimerProblem problem;
  VectorFunction v;
  ScalarFunction p;
};
ManufacturedForchheimer manufactured_forchheimer(double s, double alpha, double beta);

struct ForchheimerRow {
  int k = 0;
  double h = 0.0;
  double err_v = 0.0;  // L2
  double err_p = 0.0;  // L2
  int newton_iterations = 0;
};

std::vector<ForchheimerRow> forchheimer_study(const ExperimentConfig& cfg);

// Output.
void write_ledger_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<BalanceRow>& rows);
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);
void write_forchheimer_csv(std::ostream& os, const std::vector<ForchheimerRow>& rows);
/// Legacy ASCII VTK: phi, mu as point data; p, div v and v at centroids as cell data.
void write_vtk(std::ostream& os, const TimeStepState& s);

struct SelftestResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Central difference |(R(x+he) - R(x-he))/2h - J e| / |J e|.
double jacobian_fd_error(const CoupledAssembler& A, const Vector& x, const Vector& e, double h);

/// Inequality suite, discrete chain rule and Jacobian check on small inputs.
std::vector<SelftestResult> run_selftest(unsigned seed = 7);

/// CLI entry: run | converge | forchheimer | selftest. Exit codes 0 success,
/// 1 selftest failure, 2 config error, 3 solver failure.
int run_cli(int argc, char** argv);

}  // namespace chf
