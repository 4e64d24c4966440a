#include "chf/model.hpp"

#include <algorithm>
#include <cmath>

namespace chf {

double psi_quartic(double phi) {
  const double a = phi * (1.0 - phi);
  return 0.25 * a * a;
}

double psi_prime_quartic(double phi) { return 0.5 * phi * (1.0 - phi) * (1.0 - 2.0 * phi); }

double psi_second_quartic(double phi) { return 0.5 * (1.0 - 6.0 * phi + 6.0 * phi * phi); }

double psi_prime_av(double phi_new, double phi_old) {
  const double mid = 0.5 * (phi_new + phi_old);
  return (psi_prime_quartic(phi_new) + 4.0 * psi_prime_quartic(mid) + psi_prime_quartic(phi_old)) / 6.0;
}

double psi_prime_av_derivative(double phi_new, double phi_old) {
  const double mid = 0.5 * (phi_new + phi_old);
  return (psi_second_quartic(phi_new) + 2.0 * psi_second_quartic(mid)) / 6.0;
}

void ModelParams::validate() const {
  if (!(eps2 > 0.0)) throw std::invalid_argument("eps2 must be positive");
  if (!(s >= 1.0)) throw std::invalid_argument("Forchheimer exponent s must be >= 1");
  if (gamma != 0 && gamma != 1) throw std::invalid_argument("gamma must be 0 or 1");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!alpha || !beta || !mobility || !gamma_phi || !gamma_v) {
    throw std::invalid_argument("all parameter functions must be set");
  }
}

int ModelParams::num_steps() const { return static_cast<int>(std::lround(T / tau)); }

ParamFn clamped_affine(double at_one, double at_zero) {
  return [at_one, at_zero](double phi) {
    const double c = std::clamp(phi, 0.0, 1.0);
    return at_one * c + at_zero * (1.0 - c);
  };
}

double mobility_default(double phi) {
  const double a = phi * (1.0 - phi);
  return 1e-2 + a * a * std::max(0.0, 1.0 - phi * phi);
}

double gamma_phi_inconsistent(double phi) { return 0.2 * phi * std::max(0.0, 1.0 - phi * phi); }

double gamma_v_inconsistent(double phi) { return 2.0 * phi * std::max(0.0, 1.0 - phi * phi); }

}  // namespace chf
