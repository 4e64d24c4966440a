#include "chf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chf/quadrature.hpp"

namespace chf {

namespace {

// sum over cells and volume quadrature points of w * f(t, bary, x)
template <class F>
double integrate_volume(const Mesh& m, F&& f) {
  const auto& q = default_quadrature();
  double sum = 0.0;
  for (std::size_t tt = 0; tt < m.num_triangles(); ++tt) {
    const int t = static_cast<int>(tt);
    const auto geo = cell_geometry(m, t);
    double cell = 0.0;
    for (std::size_t k = 0; k < q.points.size(); ++k) cell += q.weights[k] * f(t, q.points[k], geo.map(q.points[k]));
    sum += cell * geo.area;
  }
  return sum;
}

void require_consecutive(const TimeStepState& n, const TimeStepState& np1) {
  if (!n.phi.space || !np1.phi.space || &n.phi.space->mesh() != &np1.phi.space->mesh()) {
    throw std::invalid_argument("states must live on one mesh");
  }
}

}  // namespace

double energy(const FEField& phi, const ModelParams& params) {
  const double grad = h1_seminorm_squared(phi);
  const double pot = integrate_volume(phi.space->mesh(), [&](int t, const auto& b, const Point&) {
    return psi_quartic(phi.value(t, b));
  });
  return 0.5 * params.eps2 * grad + pot;
}

double mass(const FEField& phi) { return integrate(phi); }

double dissipation_increment(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params) {
  require_consecutive(n, np1);
  const double s = params.s;
  const double val = integrate_volume(n.phi.space->mesh(), [&](int t, const auto& b, const Point& x) {
    const double po = n.phi.value(t, b);
    const Vec2 gm = np1.mu.gradient(t);
    const Vec2 v = np1.v.vector_value(t, x);
    const double vn = v.norm();
    const double drag = params.alpha(po) + params.beta(po) * (vn > 0.0 ? std::pow(vn, s - 1.0) : 0.0);
    return params.mobility(po) * gm.squaredNorm() + drag * vn * vn;
  });
  return params.tau * val;
}

double production_increment(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params) {
  require_consecutive(n, np1);
  const double val = integrate_volume(n.phi.space->mesh(), [&](int t, const auto& b, const Point& x) {
    const double po = n.phi.value(t, b);
    double r = params.gamma_phi(po) * np1.mu.value(t, b) + params.gamma_v(po) * np1.p.value(t, b);
    if (params.gamma == 1) r -= po * np1.mu.value(t, b) * np1.v.divergence(t, x);
    return r;
  });
  return params.tau * val;
}

double boundary_flux(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params) {
  if (params.gamma == 0) return 0.0;
  require_consecutive(n, np1);
  const Mesh& m = n.phi.space->mesh();
  const auto& q = default_quadrature();
  double sum = 0.0;
  for (std::size_t bi = 0; bi < m.boundary_edges.size(); ++bi) {
    const int e = m.boundary_edges[bi];
    const int t = m.edge_triangles[e][0];
    const auto geo = cell_geometry(m, t);
    const Point a = m.vertices[m.edges[e][0]];
    const Point b = m.vertices[m.edges[e][1]];
    const Point nrm = m.boundary_normals[bi];
    double edge = 0.0;
    for (std::size_t k = 0; k < q.edge_points.size(); ++k) {
      const Point x = a + q.edge_points[k] * (b - a);
      edge += q.edge_weights[k] * n.phi.value(t, geo.barycentric(x)) * np1.v.vector_value(t, x).dot(nrm);
    }
    sum += edge * m.edge_length(e);
  }
  return sum;
}

double mass_defect(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params) {
  require_consecutive(n, np1);
  const double source = integrate_volume(n.phi.space->mesh(), [&](int t, const auto& b, const Point&) {
    return params.gamma_phi(n.phi.value(t, b));
  });
  return mass(np1.phi) - mass(n.phi) - params.tau * (source - boundary_flux(n, np1, params));
}

double energy_defect(const TimeStepState& n, const TimeStepState& np1, const ModelParams& params) {
  return energy(np1.phi, params) - energy(n.phi, params) + dissipation_increment(n, np1, params) -
         production_increment(n, np1, params);
}

double relative_energy(const FEField& phi1, const FEField& phi2, const ModelParams& params, double c_tilde) {
  if (phi1.space != phi2.space && (!phi1.space || !phi2.space || phi1.coeffs.size() != phi2.coeffs.size())) {
    throw std::invalid_argument("relative energy needs fields on one space");
  }
  const FEField d(phi1.space, phi1.coeffs - phi2.coeffs);
  const double grad = h1_seminorm_squared(d);
  const double rest = integrate_volume(phi1.space->mesh(), [&](int t, const auto& b, const Point&) {
    const double a = phi1.value(t, b);
    const double c = phi2.value(t, b);
    const double diff = a - c;
    return psi_quartic(a) - psi_quartic(c) - psi_prime_quartic(c) * diff + 0.5 * c_tilde * diff * diff;
  });
  return 0.5 * params.eps2 * grad + rest;
}

void BalanceReport::start(const TimeStepState& s0) {
  rows_.clear();
  BalanceRow r;
  r.t = s0.t;
  r.mass = mass(s0.phi);
  r.energy = energy(s0.phi, params_);
  rows_.push_back(r);
}

const BalanceRow& BalanceReport::add_step(const TimeStepState& n, const TimeStepState& np1) {
  BalanceRow r;
  r.t = np1.t;
  r.mass = mass(np1.phi);
  r.energy = energy(np1.phi, params_);
  r.diss_inc = dissipation_increment(n, np1, params_);
  r.prod_inc = production_increment(n, np1, params_);
  r.boundary_flux = boundary_flux(n, np1, params_);
  const double e_old = rows_.empty() ? energy(n.phi, params_) : rows_.back().energy;
  const double m_old = rows_.empty() ? mass(n.phi) : rows_.back().mass;
  r.energy_defect = r.energy - e_old + r.diss_inc - r.prod_inc;
  const double source = integrate_volume(n.phi.space->mesh(), [&](int t, const auto& b, const Point&) {
    return params_.gamma_phi(n.phi.value(t, b));
  });
  r.mass_defect = r.mass - m_old - params_.tau * (source - r.boundary_flux);
  rows_.push_back(r);
  return rows_.back();
}

double BalanceReport::cumulative_mass_defect() const {
  double s = 0.0;
  for (std::size_t i = 1; i < rows_.size(); ++i) s += rows_[i].mass_defect;
  return s;
}

double BalanceReport::max_abs_mass_defect() const {
  double m = 0.0;
  for (std::size_t i = 1; i < rows_.size(); ++i) m = std::max(m, std::abs(rows_[i].mass_defect));
  return m;
}

double BalanceReport::max_scaled_energy_defect() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    m = std::max(m, rows_[i].energy_defect / std::max(1.0, std::abs(rows_[i].energy)));
  }
  return m;
}

}  // namespace chf
