#pragma once

#include <vector>

#include "chf/fe_spaces.hpp"
#include "chf/model.hpp"
#include "chf/scheme.hpp"

namespace chf {

/// (eps2/2) |grad phi|^2 + (Psi(phi), 1)
double energy(const FEField& phi, const ModelParams& params);

/// (phi, 1)
double mass(const FEField& phi);

/// tau [ (m(phi^n) grad mu, grad mu) + ((alpha + beta |v|^{s-1}) v, v) ] at step n+1
double dissipation_increment(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params);

/// tau [ (G_phi(phi^n), mu) + (G_v(phi^n), p) - gamma (phi^n mu, div v) ] at step n+1
double production_increment(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params);

/// gamma (phi^n, v^{n+1}.n) on the boundary
double boundary_flux(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params);

/// (phi^{n+1},1) - (phi^n,1) - tau [ (G_phi(phi^n),1) - gamma (phi^n, v.n)_bd ]
double mass_defect(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params);

/// E(phi^{n+1}) - E(phi^n) + tau D - tau P
double energy_defect(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params);

/// (eps2/2)|grad d|^2 + (Psi(phi1) - Psi(phi2) - Psi'(phi2) d, 1) + (c/2)|d|^2, d = phi1 - phi2
double relative_energy(const FEField& phi1, const FEField& phi2, const ModelParams& params,
                       double c_tilde = 1.0);

struct BalanceRow {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double diss_inc = 0.0;
  double prod_inc = 0.0;
  double mass_defect = 0.0;
  double energy_defect = 0.0;
  double boundary_flux = 0.0;
};

/// Ledger of a run; the first row describes the initial state with zero increments.
class BalanceReport {
 public:
  explicit BalanceReport(ModelParams params) : params_(std::move(params)) {}

  void start(const TimeStepState& s0);
  const BalanceRow& add_step(const TimeStepState& n, const TimeStepState& np1);

  const std::vector<BalanceRow>& rows() const { return rows_; }
  /// sum of per-step mass defects, equal to the telescoped defect over the run
  double cumulative_mass_defect() const;
  double max_abs_mass_defect() const;
  /// largest energy_defect / max(1, |E|) over all steps
  double max_scaled_energy_defect() const;

 private:
  ModelParams params_;
  std::vector<BalanceRow> rows_;
};

}  // namespace chf
