#include "chf/scheme.hpp"

namespace chf {

const char* pressure_convention(int gamma) { return gamma == 1 ? "p" : "p-phi*mu"; }

ChfScheme::ChfScheme(std::shared_ptr<const Mesh> mesh, ModelParams params, NewtonConfig newton)
    : mesh_(mesh), assembler_(mesh, std::move(params)), newton_(newton) {
  newton_.validate();
}

TimeStepState ChfScheme::initial_state(const ScalarFunction& phi0) const {
  return initial_state(interpolate(assembler_.cg(), phi0));
}

TimeStepState ChfScheme::initial_state(const FEField& phi0) const {
  if (phi0.space != assembler_.cg() && (!phi0.space || &phi0.space->mesh() != mesh_.get() ||
                                        phi0.space->family() != Family::CG1)) {
    throw FEError("initial phi must be a CG1 field on the scheme mesh");
  }
  TimeStepState s;
  s.t = 0.0;
  s.phi = FEField(assembler_.cg(), phi0.coeffs);
  s.mu = FEField(assembler_.cg());
  s.v = FEField(assembler_.rt());
  s.p = FEField(assembler_.dg());
  return s;
}

Vector ChfScheme::pack(const TimeStepState& s) const {
  const auto& L = assembler_.layout();
  Vector x(L.size);
  x.segment(L.phi, L.n_cg) = s.phi.coeffs;
  x.segment(L.mu, L.n_cg) = s.mu.coeffs;
  x.segment(L.v, L.n_rt) = s.v.coeffs;
  x.segment(L.p, L.n_dg) = s.p.coeffs;
  return x;
}

TimeStepState ChfScheme::unpack(double t, const Vector& x) const {
  const auto& L = assembler_.layout();
  if (x.size() != L.size) throw std::invalid_argument("state vector has wrong length");
  TimeStepState s;
  s.t = t;
  s.phi = FEField(assembler_.cg(), x.segment(L.phi, L.n_cg));
  s.mu = FEField(assembler_.cg(), x.segment(L.mu, L.n_cg));
  s.v = FEField(assembler_.rt(), x.segment(L.v, L.n_rt));
  s.p = FEField(assembler_.dg(), x.segment(L.p, L.n_dg));
  return s;
}

StepOutcome ChfScheme::step(const TimeStepState& prev, const Vector* guess) {
  assembler_.set_previous(prev.phi.coeffs);
  Vector x0 = guess ? *guess : pack(prev);
  auto result = newton_solve([this](const Vector& x) { return assembler_.residual(x); },
                             [this](const Vector& x) { return assembler_.jacobian(x); }, std::move(x0), newton_);
  return {unpack(prev.t + params().tau, result.x), std::move(result.trace)};
}

std::vector<TimeStepState> ChfScheme::run(const TimeStepState& initial, const StepCallback& callback,
                                          bool keep_trajectory) {
  const int n = params().num_steps();
  std::vector<TimeStepState> out{initial};
  TimeStepState current = initial;
  for (int k = 1; k <= n; ++k) {
    StepOutcome next;
    try {
      next = step(current);
    } catch (const NewtonFailure& e) {
      throw StepFailure("step " + std::to_string(k) + " failed: " + e.what(), k, e.trace());
    } catch (const LinearSolveError& e) {
      throw StepFailure("step " + std::to_string(k) + " failed: " + e.what(), k, {});
    } catch (const AssemblyError& e) {
      throw StepFailure("step " + std::to_string(k) + " failed: " + e.what(), k, {});
    }
    next.state.t = k * params().tau;
    if (callback) callback(current, next.state, k, next.trace);
    if (keep_trajectory) out.push_back(next.state);
    current = std::move(next.state);
  }
  if (!keep_trajectory && n > 0) out.push_back(current);
  return out;
}

}  // namespace chf
