#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chf {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}
  /// 1-based line of the offending entry, 0 when not tied to a line
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class SourceKind { Inconsistent, Consistent, None };
enum class InitialKind { Exp1, Exp2, Flat };

const char* source_name(SourceKind k);
const char* initial_name(InitialKind k);

/// Settings of one run, convergence study or Forchheimer study.
///
/// Text form: YAML mapping of sections to `key: value` pairs, plus a
/// top-level `name`. Keys are addressed as `section.key`:
///   mesh.level, mesh.k_min, mesh.k_max,
///   time.tau, time.T,
///   model.s, model.gamma, model.eps2, model.alpha1, model.alpha2,
///   model.beta1, model.beta2, model.sources, model.initial,
///   newton.tol, newton.max_iter,
///   output.dir, output.vtk_every,
///   forchheimer.alpha, forchheimer.beta, forchheimer.n_reg
struct ExperimentConfig {
  std::string name = "custom";

  int level = 3;
  int k_min = 1;
  int k_max = 5;

  double tau = 5e-3;
  double T = 0.2;

  double s = 2.0;
  int gamma = 0;
  double eps2 = 1e-4;
  double alpha1 = 1e-2;
  double alpha2 = 1.0;
  double beta1 = 1e-1;
  double beta2 = 10.0;
  SourceKind sources = SourceKind::Inconsistent;
  InitialKind initial = InitialKind::Exp1;

  double newton_tol = 1e-11;
  int newton_max_iter = 50;

  std::string outdir = "out";
  /// VTK snapshot every this many steps, 0 disables
  int vtk_every = 10;

  double forch_alpha = 1.0;
  double forch_beta = 1.0;
  std::optional<double> n_reg;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Parses the text form on top of the defaults (or of `base`).
ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base = {});

/// Reads a file; `name` becomes the file stem.
ExperimentConfig load_config_file(const std::string& path);

std::vector<std::string> preset_names();
std::optional<ExperimentConfig> preset(const std::string& name);

/// A file path when it exists, otherwise a preset name.
ExperimentConfig resolve_config(const std::string& path_or_preset);

/// Text form of cfg that parse_config reads back unchanged.
std::string format_config(const ExperimentConfig& cfg);

}  // namespace chf
