#include "chf/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace chf {

const char* source_name(SourceKind k) {
  switch (k) {
    case SourceKind::Inconsistent: return "inconsistent";
    case SourceKind::Consistent: return "consistent";
    case SourceKind::None: return "none";
  }
  return "?";
}

const char* initial_name(InitialKind k) {
  switch (k) {
    case InitialKind::Exp1: return "exp1";
    case InitialKind::Exp2: return "exp2";
    case InitialKind::Flat: return "flat";
  }
  return "?";
}

namespace {

double to_double(std::string_view v, int line, const std::string& key) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("line {}: {} expects a number, got '{}'", line, key, v), line, key);
  }
  return out;
}

int to_int(std::string_view v, int line, const std::string& key) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("line {}: {} expects an integer, got '{}'", line, key, v), line, key);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, int, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [&t](const std::string& key, double ExperimentConfig::*m) {
      t[key] = [m](ExperimentConfig& c, std::string_view v, int line, const std::string& k) {
        c.*m = to_double(v, line, k);
      };
    };
    auto num = [&t](const std::string& key, int ExperimentConfig::*m) {
      t[key] = [m](ExperimentConfig& c, std::string_view v, int line, const std::string& k) {
        c.*m = to_int(v, line, k);
      };
    };
    num("mesh.level", &ExperimentConfig::level);
    num("mesh.k_min", &ExperimentConfig::k_min);
    num("mesh.k_max", &ExperimentConfig::k_max);
    dbl("time.tau", &ExperimentConfig::tau);
    dbl("time.T", &ExperimentConfig::T);
    dbl("model.s", &ExperimentConfig::s);
    num("model.gamma", &ExperimentConfig::gamma);
    dbl("model.eps2", &ExperimentConfig::eps2);
    dbl("model.alpha1", &ExperimentConfig::alpha1);
    dbl("model.alpha2", &ExperimentConfig::alpha2);
    dbl("model.beta1", &ExperimentConfig::beta1);
    dbl("model.beta2", &ExperimentConfig::beta2);
    dbl("newton.tol", &ExperimentConfig::newton_tol);
    num("newton.max_iter", &ExperimentConfig::newton_max_iter);
    num("output.vtk_every", &ExperimentConfig::vtk_every);
    dbl("forchheimer.alpha", &ExperimentConfig::forch_alpha);
    dbl("forchheimer.beta", &ExperimentConfig::forch_beta);
    t["forchheimer.n_reg"] = [](ExperimentConfig& c, std::string_view v, int line, const std::string& k) {
      if (v == "none") c.n_reg.reset();
      else c.n_reg = to_double(v, line, k);
    };
    t["output.dir"] = [](ExperimentConfig& c, std::string_view v, int, const std::string&) {
      c.outdir = std::string(v);
    };
    t["name"] = [](ExperimentConfig& c, std::string_view v, int, const std::string&) { c.name = std::string(v); };
    t["model.sources"] = [](ExperimentConfig& c, std::string_view v, int line, const std::string& k) {
      if (v == "inconsistent") c.sources = SourceKind::Inconsistent;
      else if (v == "consistent") c.sources = SourceKind::Consistent;
      else if (v == "none") c.sources = SourceKind::None;
      else throw ConfigError(fmt::format("line {}: {} must be inconsistent, consistent or none", line, k), line, k);
    };
    t["model.initial"] = [](ExperimentConfig& c, std::string_view v, int line, const std::string& k) {
      if (v == "exp1") c.initial = InitialKind::Exp1;
      else if (v == "exp2") c.initial = InitialKind::Exp2;
      else if (v == "flat") c.initial = InitialKind::Flat;
      else throw ConfigError(fmt::format("line {}: {} must be exp1, exp2 or flat", line, k), line, k);
    };
    return t;
  }();
  return table;
}

void check(bool ok, const char* field, const std::string& msg) {
  if (!ok) throw ConfigError(std::string(field) + ": " + msg, 0, field);
}

}  // namespace

void ExperimentConfig::validate() const {
  check(level >= 0 && level <= 8, "mesh.level", "must lie in 0..8");
  check(k_min >= 0 && k_max <= 8 && k_min < k_max, "mesh.k_min", "need 0 <= k_min < k_max <= 8");
  check(tau > 0.0, "time.tau", "must be positive");
  check(T > 0.0, "time.T", "must be positive");
  check(s >= 1.0, "model.s", "must be >= 1");
  check(gamma == 0 || gamma == 1, "model.gamma", "must be 0 or 1");
  check(eps2 > 0.0, "model.eps2", "must be positive");
  check(alpha1 > 0.0 && alpha2 > 0.0, "model.alpha1", "alpha1 and alpha2 must be positive");
  check(beta1 > 0.0 && beta2 > 0.0, "model.beta1", "beta1 and beta2 must be positive");
  check(newton_tol > 0.0, "newton.tol", "must be positive");
  check(newton_max_iter >= 1, "newton.max_iter", "must be >= 1");
  check(vtk_every >= 0, "output.vtk_every", "must be >= 0");
  check(!outdir.empty(), "output.dir", "must not be empty");
  check(forch_alpha > 0.0 && forch_beta > 0.0, "forchheimer.alpha", "alpha and beta must be positive");
  check(!n_reg || *n_reg > 0.0, "forchheimer.n_reg", "must be positive");
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

void apply(ExperimentConfig& cfg, const std::string& key, const YAML::Node& value) {
  const int line = line_of(value);
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError(fmt::format("line {}: unknown key '{}'", line, key), line, key);
  if (!value.IsScalar() || value.Scalar().empty()) {
    throw ConfigError(fmt::format("line {}: {} expects a scalar value", line, key), line, key);
  }
  it->second(cfg, value.Scalar(), line, key);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    const int line = e.mark.is_null() ? 0 : e.mark.line + 1;
    throw ConfigError(fmt::format("line {}: {}", line, e.msg), line);
  }
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping of sections", line_of(root));
  for (const auto& entry : root) {
    const std::string section = entry.first.as<std::string>();
    const YAML::Node& body = entry.second;
    if (body.IsMap()) {
      for (const auto& kv : body) apply(cfg, section + "." + kv.first.as<std::string>(), kv.second);
    } else {
      apply(cfg, section, body);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig base;
  base.name = std::filesystem::path(path).stem().string();
  return parse_config(ss.str(), base);
}

std::vector<std::string> preset_names() {
  return {"exp1_s2_g0", "exp1_s2_g1", "exp2_g0", "converge", "forchheimer"};
}

std::optional<ExperimentConfig> preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "exp1_s2_g0" || name == "exp1_s2_g1") {
    c.level = 3;
    c.T = 5.0;
    c.s = 2.0;
    c.gamma = name == "exp1_s2_g1" ? 1 : 0;
    c.sources = SourceKind::Inconsistent;
    c.initial = InitialKind::Exp1;
  } else if (name == "exp2_g0") {
    c.level = 3;
    c.T = 1.0;
    c.s = 2.0;
    c.gamma = 0;
    c.sources = SourceKind::Consistent;
    c.initial = InitialKind::Exp2;
  } else if (name == "converge") {
    c.k_min = 1;
    c.k_max = 5;
    c.T = 0.2;
    c.s = 3.0;
    c.gamma = 1;
    c.vtk_every = 0;
  } else if (name == "forchheimer") {
    c.k_min = 1;
    c.k_max = 4;
    c.s = 2.0;
    c.vtk_every = 0;
  } else {
    return std::nullopt;
  }
  c.outdir = "out/" + name;
  return c;
}

ExperimentConfig resolve_config(const std::string& path_or_preset) {
  if (std::filesystem::is_regular_file(path_or_preset)) return load_config_file(path_or_preset);
  if (auto p = preset(path_or_preset)) return *p;
  std::string known;
  for (const auto& n : preset_names()) known += " " + n;
  throw ConfigError("'" + path_or_preset + "' is neither a readable file nor a preset (presets:" + known + ")");
}

std::string format_config(const ExperimentConfig& c) {
  auto num = [](double v) { return fmt::format("{}", v); };
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap << YAML::Key << "level" << YAML::Value << c.level
      << YAML::Key << "k_min" << YAML::Value << c.k_min << YAML::Key << "k_max" << YAML::Value << c.k_max
      << YAML::EndMap;
  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap << YAML::Key << "tau" << YAML::Value << num(c.tau)
      << YAML::Key << "T" << YAML::Value << num(c.T) << YAML::EndMap;
  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap << YAML::Key << "s" << YAML::Value << num(c.s)
      << YAML::Key << "gamma" << YAML::Value << c.gamma << YAML::Key << "eps2" << YAML::Value << num(c.eps2)
      << YAML::Key << "alpha1" << YAML::Value << num(c.alpha1) << YAML::Key << "alpha2" << YAML::Value
      << num(c.alpha2) << YAML::Key << "beta1" << YAML::Value << num(c.beta1) << YAML::Key << "beta2"
      << YAML::Value << num(c.beta2) << YAML::Key << "sources" << YAML::Value << source_name(c.sources)
      << YAML::Key << "initial" << YAML::Value << initial_name(c.initial) << YAML::EndMap;
  out << YAML::Key << "newton" << YAML::Value << YAML::BeginMap << YAML::Key << "tol" << YAML::Value
      << num(c.newton_tol) << YAML::Key << "max_iter" << YAML::Value << c.newton_max_iter << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap << YAML::Key << "dir" << YAML::Value << c.outdir
      << YAML::Key << "vtk_every" << YAML::Value << c.vtk_every << YAML::EndMap;
  out << YAML::Key << "forchheimer" << YAML::Value << YAML::BeginMap << YAML::Key << "alpha" << YAML::Value
      << num(c.forch_alpha) << YAML::Key << "beta" << YAML::Value << num(c.forch_beta) << YAML::Key << "n_reg"
      << YAML::Value << (c.n_reg ? num(*c.n_reg) : std::string("none")) << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace chf
