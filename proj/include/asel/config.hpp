#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asel/ladder.hpp"

namespace asel {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key = value experiment config.  Grammar: one `key = value` per line,
/// `#` starts a comment, blank lines ignored.  Unknown keys are hard errors.
class ExperimentConfig {
 public:
  static ExperimentConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  static ExperimentConfig parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!known_keys().count(key))
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                          "'");
      if (cfg.kv_.count(key))
        throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                          "'");
      cfg.kv_[key] = value;
    }
    cfg.validate();
    return cfg;
  }

  std::string mode() const { return get_string("mode"); }
  int dimension() const { return get_long("dimension", 2); }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback = "") const {
    auto it = kv_.find(key);
    if (it == kv_.end()) {
      if (fallback.empty()) throw ConfigError("config: missing required key '" + key + "'");
      return fallback;
    }
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return parse_double(key, it->second);
  }

  long get_long(const std::string& key, long fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      return std::stol(it->second);
    } catch (...) {
      throw ConfigError("config: key '" + key + "' is not an integer");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "on" || it->second == "1") return true;
    if (it->second == "false" || it->second == "off" || it->second == "0") return false;
    throw ConfigError("config: key '" + key + "' is not a boolean");
  }

  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_double(key, trim(tok)));
    if (out.empty()) throw ConfigError("config: key '" + key + "' has an empty list");
    return out;
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// Builds the ladder spec for solve modes.  Tolerance env overrides
  /// (ASEL_TOL_LINEAR / ASEL_TOL_NONLINEAR) are applied here.
  LadderSpec ladder_spec() const {
    LadderSpec spec;
    const std::string m = mode();
    if (m == "dipole") spec.mode = LadderMode::Dipole;
    else if (m == "combined") spec.mode = LadderMode::Combined;
    else if (m == "k_limit") spec.mode = LadderMode::KLimit;
    else if (m == "supercritical_contrast") spec.mode = LadderMode::SupercriticalContrast;
    else throw ConfigError("config: mode '" + m + "' is not a ladder mode");

    spec.grid_m = static_cast<int>(get_long("grid_m", 257));
    spec.g = Nonlinearity::parse(get_string("nonlinearity", "zero"));
    if (has("contrast_nonlinearity"))
      spec.g_contrast = Nonlinearity::parse(get_string("contrast_nonlinearity"));
    spec.k_list = get_list("k_list", {1.0});
    spec.j = get_double("j", 0.0);
    spec.t_schedule = get_list("t_schedule", {0.25, 0.125, 0.0625});
    spec.eps_ratio = get_double("eps_ratio", 4.0);
    spec.n_start = get_long("n_start", 4);
    spec.fit_samples = static_cast<int>(get_long("fit_samples", 16));
    spec.dipole_window.lo = get_double("fit_window_lo", 0.0);
    spec.dipole_window.hi = get_double("fit_window_hi", 0.3);
    spec.dipole_window.drop_innermost = static_cast<int>(get_long("fit_drop_innermost", 2));
    spec.dirac_window.lo = get_double("dirac_window_lo", 0.0);
    spec.dirac_window.hi = get_double("dirac_window_hi", 0.35);
    spec.dirac_window.drop_innermost = spec.dipole_window.drop_innermost;
    spec.exponent_lo = get_double("exponent_window_lo", 0.2);
    spec.exponent_hi = get_double("exponent_window_hi", 0.45);
    spec.angular_radius = get_double("angular_radius", 0.25);
    spec.solver.tol_linear_rel = env_or("ASEL_TOL_LINEAR", get_double("tol_linear", 1e-10));
    spec.solver.tol_nonlinear_rel =
        env_or("ASEL_TOL_NONLINEAR", get_double("tol_nonlinear", 1e-9));
    spec.solver.max_cg_iterations = static_cast<int>(get_long("max_cg_iterations", 10000));
    spec.solver.max_newton_iterations =
        static_cast<int>(get_long("max_newton_iterations", 60));
    spec.solver.monotone_fallback = get_bool("monotone_fallback", false);
    return spec;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
  }

  static double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (...) {
      throw ConfigError("config: key '" + key + "' is not a number: '" + v + "'");
    }
  }

  static double env_or(const char* name, double fallback) {
    const char* v = std::getenv(name);
    if (!v) return fallback;
    return std::stod(v);
  }

  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "mode",          "dimension",        "grid_m",
        "nonlinearity",  "contrast_nonlinearity", "k_list",
        "j",             "t_schedule",       "eps_ratio",
        "n_start",       "fit_samples",      "fit_window_lo",
        "fit_window_hi", "fit_drop_innermost", "dirac_window_lo",
        "dirac_window_hi", "exponent_window_lo", "exponent_window_hi",
        "angular_radius", "tol_linear",      "tol_nonlinear",
        "max_cg_iterations", "max_newton_iterations", "monotone_fallback",
        "output_dir",    "assert_subcritical", "assertions",
        "workers",       "write_fields"};
    return keys;
  }

  void validate() const {
    const std::string m = get_string("mode");
    static const std::set<std::string> modes = {"dipole", "combined", "k_limit",
                                                "supercritical_contrast", "kernels_selftest"};
    if (!modes.count(m)) throw ConfigError("config: unknown mode '" + m + "'");
    const long dim = get_long("dimension", 2);
    if (dim != 2 && dim != 3) throw ConfigError("config: dimension must be 2 or 3");
    const long gm = get_long("grid_m", 257);
    if (gm < 5 || gm % 2 == 0) throw ConfigError("config: grid_m must be odd and >= 5");
    if (m == "combined" && get_double("j", 0.0) <= 0.0)
      throw ConfigError("config: combined mode requires j > 0");
    if ((m == "dipole" || m == "k_limit") && get_double("j", 0.0) != 0.0)
      throw ConfigError("config: mode '" + m + "' requires j = 0");
    if (get_bool("assert_subcritical", m == "dipole" || m == "k_limit")) {
      const Nonlinearity g = Nonlinearity::parse(get_string("nonlinearity", "zero"));
      if ((m == "dipole" || m == "k_limit") && g.kind() == Nonlinearity::Kind::Power) {
        const double q = static_cast<double>(dim + 1) / static_cast<double>(dim - 1);
        if (g.exponent() >= q)
          throw ConfigError("config: nonlinearity power " + std::to_string(g.exponent()) +
                            " is at or above the critical exponent (N+1)/(N-1) = " +
                            std::to_string(q) + "; no x_N-odd very weak solution exists");
      }
    }
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace asel
