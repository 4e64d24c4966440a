#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chf/experiments.hpp"

namespace chf {

namespace {

constexpr int kOk = 0;
constexpr int kSelftestFailed = 1;
constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;

ExperimentConfig load(const std::string& config, const std::string& outdir) {
  ExperimentConfig cfg = resolve_config(config);
  if (!outdir.empty()) cfg.outdir = outdir;
  cfg.validate();
  return cfg;
}

int cmd_run(const ExperimentConfig& cfg) {
  fmt::print(stderr, "run {}: level {}, tau {}, T {}, s {}, gamma {}\n", cfg.name, cfg.level, cfg.tau, cfg.T,
             cfg.s, cfg.gamma);
  RunOptions opts;
  opts.on_step = [](int k, const BalanceRow& r, const NewtonTrace& tr) {
    if (k % 20 == 0) {
      fmt::print(stderr, "  step {:5d} t={:.4f} mass={:.10f} E={:.6e} newton={}\n", k, r.t, r.mass, r.energy,
                 tr.iterations());
    }
  };
  const auto summary = run_experiment(cfg, opts);
  fmt::print("steps={} newton_total={} mass_defect_cum={:.3e} energy_defect_max_scaled={:.3e} max_phi={:.6f}\n",
             summary.report.rows().size() - 1, summary.newton_iterations, summary.report.cumulative_mass_defect(),
             summary.report.max_scaled_energy_defect(), summary.max_phi);
  fmt::print("ledger written to {}\n", (std::filesystem::path(cfg.outdir) / "ledger.csv").string());
  return kOk;
}

int cmd_converge(const ExperimentConfig& cfg) {
  const auto report = convergence_study(cfg, [](const std::string& m) { fmt::print(stderr, "{}\n", m); });
  std::filesystem::create_directories(cfg.outdir);
  const auto path = std::filesystem::path(cfg.outdir) / "convergence.csv";
  std::ofstream out(path);
  write_convergence_csv(out, report);
  write_convergence_csv(std::cout, report);
  return kOk;
}

int cmd_forchheimer(const ExperimentConfig& cfg) {
  const auto rows = forchheimer_study(cfg);
  std::filesystem::create_directories(cfg.outdir);
  std::ofstream out(std::filesystem::path(cfg.outdir) / "forchheimer.csv");
  write_forchheimer_csv(out, rows);
  write_forchheimer_csv(std::cout, rows);
  return kOk;
}

int cmd_selftest() {
  bool ok = true;
  for (const auto& r : run_selftest()) {
    fmt::print("{} {}: {}\n", r.pass ? "PASS" : "FAIL", r.name, r.detail);
    ok = ok && r.pass;
  }
  return ok ? kOk : kSelftestFailed;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Cahn-Hilliard-Forchheimer finite element simulator"};
  app.require_subcommand(1);
  std::string config;
  std::string outdir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "config file or preset name")->required();
    sub->add_option("--outdir", outdir, "output directory (overrides output.dir)");
  };
  auto* run = app.add_subcommand("run", "time-dependent simulation with balance ledger");
  auto* conv = app.add_subcommand("converge", "nested-mesh convergence study");
  auto* forch = app.add_subcommand("forchheimer", "stationary Forchheimer manufactured-solution study");
  auto* self = app.add_subcommand("selftest", "inequalities, chain rule and Jacobian checks");
  add_common(run);
  add_common(conv);
  add_common(forch);
  std::string presets;
  for (const auto& n : preset_names()) presets += " " + n;
  app.footer("presets:" + presets);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*self) return cmd_selftest();
    const ExperimentConfig cfg = load(config, outdir);
    if (*run) return cmd_run(cfg);
    if (*conv) return cmd_converge(cfg);
    if (*forch) return cmd_forchheimer(cfg);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const StepFailure& e) {
    fmt::print(stderr, "solver failure at step {}: {}\n", e.step(), e.what());
    return kSolverFailure;
  } catch (const NewtonFailure& e) {
    fmt::print(stderr, "solver failure: {}\n", e.what());
    return kSolverFailure;
  } catch (const LinearSolveError& e) {
    fmt::print(stderr, "solver failure: {}\n", e.what());
    return kSolverFailure;
  }
  return kConfigError;
}

}  // namespace chf
