#include "chf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

namespace chf {

ScalarFunction initial_condition(InitialKind which, double eps2) {
  if (which == InitialKind::Flat) return [](const Point&) { return 0.5; };
  const double cy = which == InitialKind::Exp1 ? 0.5 : 0.75;
  const double width = std::sqrt(10.0 * eps2);
  return [cy, width](const Point& x) {
    const double dx = x[0] - 0.5;
    const double dy = x[1] - cy;
    const double r = std::sqrt(1.1 * dx * dx + 0.8 * dy * dy) - 0.25;
    return 0.5 - 0.5 * std::tanh(r / width);
  };
}

ModelParams make_model_params(const ExperimentConfig& cfg, double initial_mass) {
  ModelParams p;
  p.eps2 = cfg.eps2;
  p.s = cfg.s;
  p.gamma = cfg.gamma;
  p.tau = cfg.tau;
  p.T = cfg.T;
  p.alpha = clamped_affine(cfg.alpha1, cfg.alpha2);
  p.beta = clamped_affine(cfg.beta1, cfg.beta2);
  p.mobility = mobility_default;
  switch (cfg.sources) {
    case SourceKind::Inconsistent:
      p.gamma_phi = gamma_phi_inconsistent;
      p.gamma_v = gamma_v_inconsistent;
      break;
    case SourceKind::Consistent:
      p.gamma_phi = [](double) { return 0.0; };
      p.gamma_v = [initial_mass](double phi) { return phi - initial_mass; };
      break;
    case SourceKind::None:
      p.gamma_phi = [](double) { return 0.0; };
      p.gamma_v = [](double) { return 0.0; };
      break;
  }
  p.validate();
  return p;
}

NewtonConfig make_newton_config(const ExperimentConfig& cfg) {
  NewtonConfig n;
  n.abs_tol = cfg.newton_tol;
  n.max_iterations = cfg.newton_max_iter;
  return n;
}

namespace {

struct Setup {
  std::unique_ptr<ChfScheme> scheme;
  TimeStepState initial;
};

Setup make_setup(const ExperimentConfig& cfg, std::shared_ptr<const Mesh> mesh) {
  auto cg = make_space(mesh, Family::CG1);
  const FEField phi0 = interpolate(cg, initial_condition(cfg.initial, cfg.eps2));
  auto params = make_model_params(cfg, integrate(phi0));
  Setup s;
  s.scheme = std::make_unique<ChfScheme>(mesh, std::move(params), make_newton_config(cfg));
  s.initial = s.scheme->initial_state(phi0);
  return s;
}

void write_snapshot(const std::filesystem::path& dir, int step, const TimeStepState& s) {
  std::ofstream out(dir / fmt::format("phi_{:04d}.vtk", step));
  write_vtk(out, s);
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  auto mesh = std::make_shared<const Mesh>(build_level_mesh(cfg.level));
  Setup setup = make_setup(cfg, mesh);
  ChfScheme& scheme = *setup.scheme;

  const std::filesystem::path dir(cfg.outdir);
  if (opts.write_output) std::filesystem::create_directories(dir);

  RunSummary summary{BalanceReport(scheme.params()), setup.initial, 0, 0.0};
  summary.report.start(setup.initial);
  const int n_steps = scheme.params().num_steps();
  if (opts.write_output && cfg.vtk_every > 0) write_snapshot(dir, 0, setup.initial);

  auto on_step = [&](const TimeStepState& prev, const TimeStepState& next, int k, const NewtonTrace& trace) {
    const BalanceRow& row = summary.report.add_step(prev, next);
    summary.newton_iterations += trace.iterations();
    if (opts.write_output && cfg.vtk_every > 0 && (k % cfg.vtk_every == 0 || k == n_steps)) {
      write_snapshot(dir, k, next);
    }
    if (opts.on_step) opts.on_step(k, row, trace);
  };
  auto states = scheme.run(setup.initial, on_step, false);
  summary.final_state = states.back();
  summary.max_phi = summary.final_state.phi.coeffs.maxCoeff();

  if (opts.write_output) {
    std::ofstream out(dir / "ledger.csv");
    write_ledger_csv(out, cfg, summary.report.rows());
  }
  return summary;
}

std::optional<double> eoc(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::nullopt;
  return std::log2(coarse / fine);
}

TimeStepState prolong_state(const TimeStepState& s, const ChfScheme& fine) {
  const auto& A = fine.assembler();
  TimeStepState out;
  out.t = s.t;
  out.phi = prolong(s.phi, A.cg());
  out.mu = prolong(s.mu, A.cg());
  out.v = prolong(s.v, A.rt());
  out.p = prolong(s.p, A.dg());
  return out;
}

std::array<double, 4> trajectory_errors(const std::vector<TimeStepState>& a, const std::vector<TimeStepState>& b,
                                        double tau) {
  if (a.size() != b.size()) throw std::invalid_argument("trajectories differ in length");
  std::array<double, 4> err{};
  for (std::size_t n = 0; n < a.size(); ++n) {
    const FEField dphi(b[n].phi.space, a[n].phi.coeffs - b[n].phi.coeffs);
    err[0] = std::max(err[0], h1_norm_squared(dphi));
    if (n == 0) continue;
    err[1] += tau * h1_norm_squared(FEField(b[n].mu.space, a[n].mu.coeffs - b[n].mu.coeffs));
    err[2] += tau * hdiv_norm_squared(FEField(b[n].v.space, a[n].v.coeffs - b[n].v.coeffs));
    err[3] += tau * l2_norm_squared(FEField(b[n].p.space, a[n].p.coeffs - b[n].p.coeffs));
  }
  return err;
}

ConvergenceReport convergence_study(const ExperimentConfig& cfg,
                                    const std::function<void(const std::string&)>& log) {
  cfg.validate();
  auto say = [&](const std::string& m) {
    if (log) log(m);
  };
  ConvergenceReport report;

  auto coarse_mesh = std::make_shared<const Mesh>(build_level_mesh(cfg.k_min));
  Setup coarse = make_setup(cfg, coarse_mesh);
  say(fmt::format("level {}: {}", cfg.k_min, mesh_summary(*coarse_mesh)));
  std::vector<TimeStepState> coarse_traj = coarse.scheme->run(coarse.initial);

  for (int k = cfg.k_min; k < cfg.k_max; ++k) {
    auto fine_mesh = std::make_shared<const Mesh>(refine_uniform(*coarse_mesh));
    Setup fine = make_setup(cfg, fine_mesh);
    say(fmt::format("level {}: {}", k + 1, mesh_summary(*fine_mesh)));
    std::vector<TimeStepState> fine_traj = fine.scheme->run(fine.initial);

    std::vector<TimeStepState> lifted;
    lifted.reserve(coarse_traj.size());
    for (const auto& s : coarse_traj) lifted.push_back(prolong_state(s, *fine.scheme));
    coarse_traj.clear();

    ConvergenceRow row;
    row.k = k;
    row.h = coarse_mesh->h_max;
    row.err = trajectory_errors(lifted, fine_traj, cfg.tau);
    if (!report.rows.empty()) {
      for (int i = 0; i < 4; ++i) row.eoc[i] = eoc(report.rows.back().err[i], row.err[i]);
    }
    report.rows.push_back(row);
    say(fmt::format("k={} err phi={:.3e} mu={:.3e} v={:.3e} p={:.3e}", k, row.err[0], row.err[1], row.err[2],
                    row.err[3]));

    coarse_mesh = fine_mesh;
    coarse_traj = std::move(fine_traj);
  }
  return report;
}

ManufacturedForchheimer manufactured_forchheimer(double s, double alpha, double beta) {
  ManufacturedForchheimer m;
  m.v = [](const Point& x) { return Vec2(x[1] * (1.0 - x[1]) + x[0] * x[0], x[0] * x[1]); };
  m.p = [](const Point& x) { return x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]); };
  ForchheimerProblem& P = m.problem;
  P.s = s;
  P.alpha0 = alpha;
  P.beta0 = beta;
  P.alpha = [alpha](const Point&) { return alpha; };
  P.beta = [beta](const Point&) { return beta; };
  const auto v = m.v;
  P.f = [v, s, alpha, beta](const Point& x) {
    const Vec2 vv = v(x);
    const Vec2 grad_p((1.0 - 2.0 * x[0]) * x[1] * (1.0 - x[1]), x[0] * (1.0 - x[0]) * (1.0 - 2.0 * x[1]));
    return Vec2(beta * forchheimer_nonlinearity(vv, s) + alpha * vv + grad_p);
  };
  P.g = [](const Point& x) { return 3.0 * x[0]; };
  P.h = [](const Point&) { return 0.0; };
  return m;
}

std::vector<ForchheimerRow> forchheimer_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto mf = manufactured_forchheimer(cfg.s, cfg.forch_alpha, cfg.forch_beta);
  std::vector<ForchheimerRow> rows;
  for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
    auto mesh = std::make_shared<const Mesh>(build_level_mesh(k));
    const auto sol = solve_forchheimer(mf.problem, mesh, cfg.n_reg, make_newton_config(cfg));
    rows.push_back({k, mesh->h_max, std::sqrt(l2_error_squared(sol.v, mf.v)),
                    std::sqrt(l2_error_squared(sol.p, mf.p)), sol.trace.iterations()});
  }
  return rows;
}

void write_ledger_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<BalanceRow>& rows) {
  os << fmt::format("# chf-ledger v1 name={} level={} tau={} T={} s={} gamma={} sources={} pressure={}\n",
                    cfg.name, cfg.level, cfg.tau, cfg.T, cfg.s, cfg.gamma, source_name(cfg.sources),
                    pressure_convention(cfg.gamma));
  os << "t,mass,energy,diss_inc,prod_inc,mass_defect,energy_defect,boundary_flux\n";
  for (const auto& r : rows) {
    os << fmt::format("{:.6g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t, r.mass, r.energy,
                      r.diss_inc, r.prod_inc, r.mass_defect, r.energy_defect, r.boundary_flux);
  }
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "k,h,err_phi,eoc_phi,err_mu,eoc_mu,err_v,eoc_v,err_p,eoc_p\n";
  for (const auto& r : report.rows) {
    os << r.k << ',' << fmt::format("{:.6g}", r.h);
    for (int i = 0; i < 4; ++i) {
      os << ',' << fmt::format("{:.6e}", r.err[i]) << ','
         << (r.eoc[i] ? fmt::format("{:.2f}", *r.eoc[i]) : std::string("n/a"));
    }
    os << '\n';
  }
}

void write_forchheimer_csv(std::ostream& os, const std::vector<ForchheimerRow>& rows) {
  os << "k,h,err_v_l2,err_p_l2,newton_iterations\n";
  for (const auto& r : rows) {
    os << fmt::format("{},{:.6g},{:.6e},{:.6e},{}\n", r.k, r.h, r.err_v, r.err_p, r.newton_iterations);
  }
}

void write_vtk(std::ostream& os, const TimeStepState& s) {
  const Mesh& m = s.phi.space->mesh();
  const std::size_t nv = m.num_vertices();
  const std::size_t nt = m.num_triangles();
  os << "# vtk DataFile Version 3.0\n";
  os << fmt::format("chf t={:.6g}\n", s.t);
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nv << " double\n";
  for (const auto& x : m.vertices) os << fmt::format("{:.17g} {:.17g} 0\n", x[0], x[1]);
  os << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : m.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << nt << '\n';
  for (std::size_t t = 0; t < nt; ++t) os << "5\n";

  os << "POINT_DATA " << nv << '\n';
  auto point_scalar = [&](const char* name, const FEField& f) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < f.coeffs.size(); ++i) os << fmt::format("{:.17g}\n", f.coeffs[i]);
  };
  point_scalar("phi", s.phi);
  point_scalar("mu", s.mu);

  constexpr std::array<double, 3> centre{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  os << "CELL_DATA " << nt << '\n';
  os << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (std::size_t t = 0; t < nt; ++t) os << fmt::format("{:.17g}\n", s.p.value(static_cast<int>(t), centre));
  os << "SCALARS div_v double 1\nLOOKUP_TABLE default\n";
  for (std::size_t t = 0; t < nt; ++t) {
    os << fmt::format("{:.17g}\n", s.v.divergence(static_cast<int>(t), m.centroid(static_cast<int>(t))));
  }
  os << "VECTORS v double\n";
  for (std::size_t t = 0; t < nt; ++t) {
    const Vec2 v = s.v.vector_value(static_cast<int>(t), m.centroid(static_cast<int>(t)));
    os << fmt::format("{:.17g} {:.17g} 0\n", v[0], v[1]);
  }
}

}  // namespace chf
