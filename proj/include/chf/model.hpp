#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace chf {

// Quartic double well and its derivatives.
double psi_quartic(double phi);
double psi_prime_quartic(double phi);
double psi_second_quartic(double phi);

/// Time average of psi' along the linear path phi_old -> phi_new.
/// Simpson's rule with weights (1, 4, 1)/6 is exact because psi' is cubic.
double psi_prime_av(double phi_new, double phi_old);
/// d psi_prime_av / d phi_new
double psi_prime_av_derivative(double phi_new, double phi_old);

using ParamFn = std::function<double(double)>;

/// Constants and parameter functions of the coupled model.
///
/// The pressure unknown is the physical p for gamma = 1 and the shifted
/// p - phi*mu for gamma = 0.
struct ModelParams {
  double eps2 = 1e-4;
  double s = 2.0;
  int gamma = 0;
  double tau = 5e-3;
  double T = 0.2;

  ParamFn alpha;
  ParamFn beta;
  ParamFn mobility;
  ParamFn gamma_phi;
  ParamFn gamma_v;

  /// Throws std::invalid_argument on the first violated constraint.
  void validate() const;
  int num_steps() const;
};

/// alpha1*phi + alpha2*(1-phi) with phi clamped to [0,1].
ParamFn clamped_affine(double at_one, double at_zero);

/// 1e-2 + phi^2 (1-phi)^2 max{0, 1-phi^2}
double mobility_default(double phi);

/// phi max{0, 1-phi^2} / 5 and 2 phi max{0, 1-phi^2}
double gamma_phi_inconsistent(double phi);
double gamma_v_inconsistent(double phi);

}  // namespace chf
