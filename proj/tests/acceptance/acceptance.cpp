#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "chf/experiments.hpp"

using namespace chf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> check;
};

std::shared_ptr<const Mesh> level_mesh(int k) { return std::make_shared<const Mesh>(build_level_mesh(k)); }

// Independent reference formulas.

double ref_psi(double x) { return 0.25 * x * x * (1 - x) * (1 - x); }

Vec2 ref_pow(const Vec2& x, double e) {
  const double n = x.norm();
  return n == 0.0 ? Vec2::Zero().eval() : Vec2(std::pow(n, e) * x);
}

/// Slacks of the four inequalities, recomputed from their textbook statements.
std::array<double, 4> ref_slacks(const Vec2& x, const Vec2& y, double s, std::array<double, 4>& scale) {
  const double d = (x - y).norm(), nx = x.norm(), ny = y.norm();
  const Vec2 fx = ref_pow(x, s - 1), fy = ref_pow(y, s - 1);
  const Vec2 gx = ref_pow(x, (1 - s) / s), gy = ref_pow(y, (1 - s) / s);
  std::array<double, 4> lhs, rhs;
  lhs[0] = (fx - fy).norm();
  rhs[0] = s * std::pow(2.0, s - 1) * (std::pow(nx, s - 1) + std::pow(ny, s - 1)) * d;
  lhs[1] = std::pow(2.0, 1 - s) * std::pow(d, s + 1);
  rhs[1] = (fx - fy).dot(x - y);
  lhs[2] = (gx - gy).norm();
  rhs[2] = std::pow(2.0, 1 - 1 / s) * std::pow(d, 1 / s);
  const double den = std::pow(nx, 1 - 1 / s) + std::pow(ny, 1 - 1 / s);
  lhs[3] = den > 0 ? d * d / den : 0.0;
  rhs[3] = s * (gx - gy).dot(x - y);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = rhs[i] - lhs[i];
    scale[i] = std::max({std::abs(lhs[i]), std::abs(rhs[i]), 1e-300});
  }
  return out;
}

Point to_point(const Mesh& m, int t, const std::array<double, 3>& b) {
  const auto& tri = m.triangles[t];
  return b[0] * m.vertices[tri[0]] + b[1] * m.vertices[tri[1]] + b[2] * m.vertices[tri[2]];
}

/// sum over cells and rule points of |K| w f(t, bary, x)
template <class F>
double integrate_cells(const Mesh& m, F f) {
  const auto& q = default_quadrature();
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t)
    for (std::size_t k = 0; k < q.points.size(); ++k)
      s += m.area(t) * q.weights[k] * f(t, q.points[k], to_point(m, t, q.points[k]));
  return s;
}

/// (phi, 1) of a CG1 field: |K|/3 times the vertex sum on each cell
double ref_mass(const FEField& phi) {
  const Mesh& m = phi.space->mesh();
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    const auto& tri = m.triangles[t];
    s += m.area(t) / 3.0 * (phi.coeffs[tri[0]] + phi.coeffs[tri[1]] + phi.coeffs[tri[2]]);
  }
  return s;
}

Vector random_vector(std::mt19937& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (auto& c : v) c = u(rng);
  return v;
}

ExperimentConfig exp1_config(int gamma, double T) {
  ExperimentConfig cfg;
  cfg.level = 3;
  cfg.s = 2.0;
  cfg.gamma = gamma;
  cfg.T = T;
  cfg.sources = SourceKind::Inconsistent;
  cfg.initial = InitialKind::Exp1;
  return cfg;
}

std::string fmt_list(const std::vector<double>& v, const char* pattern = "{:.3e}") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt::format(fmt::runtime(pattern), v[i]);
  return s;
}

Outcome inequalities() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> lg(-8.0, 2.0);
  long bad_lib = 0, bad_ref = 0;
  double worst = 0.0;
  for (double s : {1.5, 2.0, 3.0}) {
    for (int i = 0; i < 100000; ++i) {
      Vec2 x(u(rng), u(rng));
      Vec2 y(u(rng), u(rng));
      if (i % 4 == 1) y = x + std::pow(10.0, lg(rng)) * Vec2(u(rng), u(rng));
      if (i % 50 == 2) y.setZero();
      if (i % 50 == 3) x.setZero();
      if (i % 50 == 4) y = x;
      const auto lib = check_inequalities(x, y, s);
      if (!lib.holds(1e-12)) ++bad_lib;
      std::array<double, 4> scale;
      const auto ref = ref_slacks(x, y, s, scale);
      for (int j = 0; j < 4; ++j) {
        if (ref[j] < -1e-12 * scale[j]) ++bad_ref;
        worst = std::min(worst, ref[j] / scale[j]);
      }
    }
  }
  return {bad_lib == 0 && bad_ref == 0,
          fmt::format("3 x 1e5 pairs, violations {} (library) / {} (reference), min scaled slack {:.2e}", bad_lib,
                      bad_ref, worst)};
}

Outcome chain_rule() {
  auto mesh = level_mesh(2);
  auto cg = make_space(mesh, Family::CG1);
  std::mt19937 rng(99);
  const double tau = 5e-3;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const FEField a(cg, random_vector(rng, cg->ndofs(), -0.5, 1.5));
    const FEField b(cg, random_vector(rng, cg->ndofs(), -0.5, 1.5));
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    lhs = integrate_cells(*mesh, [&](int t, const auto& bc, const Point&) {
      const double pn = a.value(t, bc), pp = b.value(t, bc);
      return psi_prime_av(pn, pp) * (pn - pp) / tau;
    });
    rhs = integrate_cells(*mesh, [&](int t, const auto& bc, const Point&) {
      return (ref_psi(a.value(t, bc)) - ref_psi(b.value(t, bc))) / tau;
    });
    scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return {worst <= 1e-12, fmt::format("100 pairs, max scaled defect {:.2e} (bound 1e-12)", worst)};
}

Outcome jacobian() {
  auto mesh = level_mesh(2);
  std::mt19937 rng(5);
  double worst = 0.0;
  int states = 0;
  for (double s : {1.5, 2.0, 3.0}) {
    for (int gamma : {0, 1}) {
      ExperimentConfig cfg;
      cfg.s = s;
      cfg.gamma = gamma;
      CoupledAssembler A(mesh, make_model_params(cfg, 0.3));
      const auto& L = A.layout();
      for (int n = 0; n < 5; ++n) {
        A.set_previous(random_vector(rng, L.n_cg, -0.2, 1.2));
        const Vector x = random_vector(rng, L.size, -1.0, 1.0);
        const Vector e = random_vector(rng, L.size, -1.0, 1.0);
        const double h = 1e-6;
        const Vector fd = (A.residual(x + h * e) - A.residual(x - h * e)) / (2 * h);
        const Vector je = A.jacobian(x) * e;
        worst = std::max(worst, (fd - je).norm() / je.norm());
        ++states;
      }
    }
  }
  return {worst <= 1e-5, fmt::format("{} states on level 2, max relative error {:.2e} (bound 1e-5)", states, worst)};
}

struct BalanceRun {
  double cum_mass_defect = 0.0;
  double ref_cum_mass_defect = 0.0;
  double max_scaled_energy_defect = -INFINITY;
  double max_energy_identity_gap = 0.0;
  double max_mass_drift = 0.0;
  std::vector<double> masses;
  int steps = 0;
};

BalanceRun balance_run(const ExperimentConfig& cfg) {
  auto mesh = level_mesh(cfg.level);
  auto cg = make_space(mesh, Family::CG1);
  const FEField phi0 = interpolate(cg, initial_condition(cfg.initial, cfg.eps2));
  const ModelParams p = make_model_params(cfg, ref_mass(phi0));
  ChfScheme sch(mesh, p, make_newton_config(cfg));
  BalanceReport report(p);
  BalanceRun out;
  const auto s0 = sch.initial_state(phi0);
  report.start(s0);
  out.masses.push_back(ref_mass(s0.phi));
  sch.run(
      s0,
      [&](const TimeStepState& a, const TimeStepState& b, int, const NewtonTrace&) {
        const auto& row = report.add_step(a, b);
        out.max_scaled_energy_defect =
            std::max(out.max_scaled_energy_defect, row.energy_defect / std::max(1.0, std::abs(row.energy)));
        // with an exact chain rule the defect equals -(eps2/2)|grad(phi^{n+1} - phi^n)|^2
        const double gap = integrate_cells(*mesh, [&](int t, const auto&, const Point&) {
          return (b.phi.gradient(t) - a.phi.gradient(t)).squaredNorm();
        });
        out.max_energy_identity_gap =
            std::max(out.max_energy_identity_gap, std::abs(row.energy_defect + 0.5 * p.eps2 * gap));
        const double src = integrate_cells(*mesh, [&](int t, const auto& bc, const Point&) {
          return p.gamma_phi(a.phi.value(t, bc));
        });
        out.ref_cum_mass_defect += ref_mass(b.phi) - ref_mass(a.phi) - p.tau * (src - row.boundary_flux);
        out.masses.push_back(ref_mass(b.phi));
        out.max_mass_drift = std::max(out.max_mass_drift, std::abs(out.masses.back() - out.masses.front()));
        ++out.steps;
      },
      false);
  out.cum_mass_defect = report.cumulative_mass_defect();
  return out;
}

const BalanceRun& exp1_g0_run() {
  static const BalanceRun run = balance_run(exp1_config(0, 0.5));
  return run;
}

Outcome mass_balance() {
  const auto& r = exp1_g0_run();
  const bool ok = std::abs(r.cum_mass_defect) <= 1e-10 && std::abs(r.ref_cum_mass_defect) <= 1e-10;
  return {ok, fmt::format("{} steps, cumulative defect {:.2e} (ledger) / {:.2e} (reference) (bound 1e-10)", r.steps,
                          r.cum_mass_defect, r.ref_cum_mass_defect)};
}

Outcome energy_sign() {
  const auto& r = exp1_g0_run();
  return {r.max_scaled_energy_defect <= 1e-9,
          fmt::format("max scaled defect {:.2e} (bound +1e-9), |defect + eps2/2 |grad d phi|^2| <= {:.2e}",
                      r.max_scaled_energy_defect, r.max_energy_identity_gap)};
}

Outcome consistent_sources() {
  ExperimentConfig cfg = exp1_config(0, 1.0);
  cfg.sources = SourceKind::Consistent;
  cfg.initial = InitialKind::Exp2;
  const auto r = balance_run(cfg);
  return {r.max_mass_drift <= 1e-10,
          fmt::format("{} steps, max |(phi^n,1) - (phi^0,1)| = {:.2e} (bound 1e-10)", r.steps, r.max_mass_drift)};
}

Outcome convergence() {
  ExperimentConfig cfg = *preset("converge");
  cfg.k_min = 1;
  cfg.k_max = 5;
  cfg.tau = 5e-3;
  cfg.T = 0.2;
  cfg.s = 3.0;
  cfg.gamma = 1;
  const auto rep = convergence_study(cfg, [](const std::string& m) { fmt::print(stderr, "  {}\n", m); });
  std::string table;
  for (const auto& r : rep.rows) {
    table += fmt::format("\n    k={} err", r.k);
    for (int i = 0; i < 4; ++i) table += fmt::format(" {:.3e}", r.err[i]);
    table += " eoc";
    for (int i = 0; i < 4; ++i) table += r.eoc[i] ? fmt::format(" {:6.2f}", *r.eoc[i]) : std::string("    n/a");
  }
  if (rep.rows.size() < 3) return {false, "too few rows" + table};
  const auto& fin = rep.rows.back();
  const std::array<double, 4> bound{1.5, 1.5, 3.0, 3.0};
  bool rates = true;
  for (int i = 0; i < 4; ++i) rates = rates && fin.eoc[i] && *fin.eoc[i] >= bound[i];
  // improvement pattern: the finest eoc is at least the one before it for v and p,
  // and every error decreases over the last two rows
  const auto& prev = rep.rows[rep.rows.size() - 2];
  bool pattern = true;
  for (int i : {2, 3}) pattern = pattern && prev.eoc[i] && fin.eoc[i] && *fin.eoc[i] >= *prev.eoc[i];
  for (int i = 0; i < 4; ++i) pattern = pattern && fin.err[i] < prev.err[i];
  return {rates && pattern,
          fmt::format("finest eoc phi/mu/v/p vs 1.5/1.5/3/3: {}, improvement pattern: {}{}", rates ? "met" : "missed",
                      pattern ? "yes" : "no", table)};
}

Outcome manufactured() {
  ForchheimerProblem pb;
  pb.s = 2.0;
  pb.f = [](const Point& q) {
    const double x = q[0], y = q[1];
    const Vec2 v(y * (1 - y) + x * x, x * y);
    const Vec2 gp((1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y));
    return Vec2(v.norm() * v + v + gp);
  };
  pb.g = [](const Point& q) { return 3.0 * q[0]; };
  const VectorFunction vex = [](const Point& q) { return Vec2(q[1] * (1 - q[1]) + q[0] * q[0], q[0] * q[1]); };
  NewtonConfig nc;
  nc.abs_tol = 1e-11;
  std::vector<double> err, its;
  bool ok = true;
  for (int k = 1; k <= 4; ++k) {
    const auto sol = solve_forchheimer(pb, level_mesh(k), std::nullopt, nc);
    err.push_back(std::sqrt(l2_error_squared(sol.v, vex)));
    its.push_back(sol.trace.iterations());
    ok = ok && sol.trace.converged && sol.trace.iterations() <= 8 && sol.trace.residual_norms.back() <= 1e-11;
  }
  std::vector<double> ratios;
  for (std::size_t i = 1; i < err.size(); ++i) {
    ratios.push_back(err[i - 1] / err[i]);
    ok = ok && ratios.back() >= 3.0;
  }
  return {ok, fmt::format("L2 v errors {}; ratios {} (bound 3); Newton iterations {}", fmt_list(err),
                          fmt_list(ratios, "{:.2f}"), fmt_list(its, "{:.0f}"))};
}

Outcome regularization() {
  auto mesh = level_mesh(3);
  ForchheimerProblem pb;
  pb.s = 2.0;
  pb.f = [](const Point& q) { return Vec2(std::sin(M_PI * q[1]), q[0] * q[0]); };
  pb.g = [](const Point& q) { return q[0] - 0.5; };
  pb.h = [](const Point& q) { return q[1]; };
  const auto lim = solve_forchheimer(pb, mesh);
  std::vector<double> d;
  for (double n : {10.0, 100.0, 1000.0}) {
    const auto sol = solve_forchheimer(pb, mesh, n);
    const FEField diff(lim.v.space, sol.v.coeffs - lim.v.coeffs);
    d.push_back(std::sqrt(l2_norm_squared(diff)));
  }
  const bool ok = d[0] > d[1] && d[1] > d[2];
  return {ok, fmt::format("|v_n - v_inf| for n = 10, 100, 1000: {}", fmt_list(d))};
}

Outcome uniqueness() {
  auto mesh = level_mesh(3);
  double worst_x = 0.0, worst_rel = 0.0;
  for (int gamma : {0, 1}) {
    const ExperimentConfig cfg = exp1_config(gamma, 0.2);
    ChfScheme sch(mesh, make_model_params(cfg, 0.0), make_newton_config(cfg));
    const auto s0 = sch.initial_state(initial_condition(InitialKind::Exp1, cfg.eps2));
    const auto a = sch.step(s0);
    const Vector zero = Vector::Zero(sch.assembler().layout().size);
    const auto b = sch.step(s0, &zero);
    worst_x = std::max(worst_x, (sch.pack(a.state) - sch.pack(b.state)).lpNorm<Eigen::Infinity>());
    const double scale = std::max(1.0, energy(a.state.phi, sch.params()));
    worst_rel = std::max(worst_rel, relative_energy(a.state.phi, b.state.phi, sch.params()) / scale);
  }
  return {worst_x <= 1e-9 && worst_rel <= 1e-16,
          fmt::format("both regimes: max |x_a - x_b| {:.2e} (bound 1e-9), relative energy / scale {:.2e} (bound 1e-16)",
                      worst_x, worst_rel)};
}

Outcome inf_sup() {
  std::vector<double> c;
  for (int k = 1; k <= 3; ++k) c.push_back(inf_sup_constant(level_mesh(k)));
  bool ok = c[0] > 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) ok = ok && c[i] > 0.8 * c[i - 1];
  return {ok, fmt::format("constants on levels 1..3: {}", fmt_list(c, "{:.5f}"))};
}

Outcome gamma_contrast() {
  std::array<double, 2> maxphi{};
  for (int gamma : {0, 1}) {
    ExperimentConfig cfg = exp1_config(gamma, 5.0);
    RunOptions opts;
    opts.write_output = false;
    maxphi[gamma] = run_experiment(cfg, opts).final_state.phi.coeffs.maxCoeff();
  }
  const bool ok = (maxphi[0] > 1.0 && maxphi[1] <= 1.0 + 1e-3) || (maxphi[1] > 1.0 && maxphi[0] <= 1.0 + 1e-3);
  return {ok, fmt::format("max nodal phi at t=5: gamma=0 {:.6f}, gamma=1 {:.6f}", maxphi[0], maxphi[1])};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "inequality oracle suite", inequalities},
      {2, "discrete chain rule", chain_rule},
      {3, "Jacobian consistency", jacobian},
      {4, "mass balance", mass_balance},
      {5, "energy-dissipation sign", energy_sign},
      {6, "consistent-source conservation", consistent_sources},
      {7, "convergence rates", convergence},
      {8, "Forchheimer manufactured solution", manufactured},
      {9, "regularization consistency", regularization},
      {10, "step uniqueness", uniqueness},
      {11, "inf-sup witness", inf_sup},
      {12, "gamma contrast", gamma_contrast},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("{} criterion {:2d} ({}): {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail, secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
