#pragma once

#include <memory>
#include <random>

#include "chf/experiments.hpp"

namespace chf::testing {

inline std::shared_ptr<const Mesh> level_mesh(int k) { return std::make_shared<const Mesh>(build_level_mesh(k)); }

inline Vector random_vector(std::mt19937& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (auto& c : v) c = u(rng);
  return v;
}

inline FEField random_field(std::mt19937& rng, std::shared_ptr<const FESpace> space, double lo = -1.0,
                            double hi = 1.0) {
  return FEField(space, random_vector(rng, static_cast<Eigen::Index>(space->ndofs()), lo, hi));
}

/// Experiment-1 model functions with the given exponent and boundary regime.
inline ModelParams exp1_params(double s, int gamma, double T = 0.05) {
  ExperimentConfig cfg;
  cfg.s = s;
  cfg.gamma = gamma;
  cfg.T = T;
  return make_model_params(cfg, 0.0);
}

/// Model functions with constant values, handy for ledger oracles.
inline ModelParams constant_params(double alpha, double beta, double m, int gamma = 0) {
  ModelParams p;
  p.gamma = gamma;
  p.alpha = [alpha](double) { return alpha; };
  p.beta = [beta](double) { return beta; };
  p.mobility = [m](double) { return m; };
  p.gamma_phi = [](double) { return 0.0; };
  p.gamma_v = [](double) { return 0.0; };
  return p;
}

}  // namespace chf::testing
