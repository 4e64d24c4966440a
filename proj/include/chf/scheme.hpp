#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "chf/assembly.hpp"
#include "chf/fe_spaces.hpp"
#include "chf/linalg.hpp"
#include "chf/model.hpp"

namespace chf {

/// (phi, mu, v, p) at time t. For gamma = 0 the pressure is p - phi*mu.
struct TimeStepState {
  double t = 0.0;
  FEField phi;
  FEField mu;
  FEField v;
  FEField p;
};

/// "p" for gamma = 1, "p-phi*mu" for gamma = 0.
const char* pressure_convention(int gamma);

class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, int step, NewtonTrace trace)
      : std::runtime_error(what), step_(step), trace_(std::move(trace)) {}
  /// 1-based index of the step that failed
  int step() const { return step_; }
  const NewtonTrace& trace() const { return trace_; }

 private:
  int step_;
  NewtonTrace trace_;
};

struct StepOutcome {
  TimeStepState state;
  NewtonTrace trace;
};

/// Fully discrete time stepper on a fixed mesh.
class ChfScheme {
 public:
  using StepCallback =
      std::function<void(const TimeStepState& prev, const TimeStepState& next, int step, const NewtonTrace& trace)>;

  ChfScheme(std::shared_ptr<const Mesh> mesh, ModelParams params, NewtonConfig newton = {});

  const ModelParams& params() const { return assembler_.params(); }
  const CoupledAssembler& assembler() const { return assembler_; }
  const std::shared_ptr<const Mesh>& mesh() const { return mesh_; }

  /// phi interpolated into CG1, mu, v, p zero.
  TimeStepState initial_state(const ScalarFunction& phi0) const;
  TimeStepState initial_state(const FEField& phi0) const;

  Vector pack(const TimeStepState& s) const;
  TimeStepState unpack(double t, const Vector& x) const;

  /// One step from `prev`; Newton starts from `guess`, or from `prev` when null.
  /// Throws NewtonFailure.
  StepOutcome step(const TimeStepState& prev, const Vector* guess = nullptr);

  /// States at t = 0, tau, ..., T. With keep_trajectory = false only the
  /// initial and final states are returned. Step failures are rethrown as
  /// StepFailure.
  std::vector<TimeStepState> run(const TimeStepState& initial, const StepCallback& callback = {},
                                 bool keep_trajectory = true);

 private:
  std::shared_ptr<const Mesh> mesh_;
  CoupledAssembler assembler_;
  NewtonConfig newton_;
};

}  // namespace chf
