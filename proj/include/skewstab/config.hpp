#ifndef SKEWSTAB_CONFIG_HPP
#define SKEWSTAB_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace skewstab {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Run configuration. One INI-style file ([section] + key = value), no
/// environment variables; every default is echoed into the report header so
/// each number in the output is reproducible from the file alone.
struct RunConfig {
  // [system]
  std::string base_family = "linear";
  std::size_t base_k = 2;
  double base_c = 0.0;
  double eps_rho = 1e-2;
  std::string fiber_family = "affine";
  double alpha = 0.5;
  std::string fiber_offset = "const:0.25";
  double zeta = 1.0;

  // [grids]
  std::size_t n_base = 1024;
  std::size_t n_fiber = 257;
  std::size_t atom_cap = 8192;
  std::size_t lp_cap = 2048;

  // [solver]
  double tol = 0.0;  // 0 = default max(1e-6, 2 h_fib^zeta)
  std::size_t max_iter = 200;
  std::uint64_t seed = 1;
  std::size_t pair_budget = 2048;

  // [perturbation]
  std::string perturb_kind = "fiber-translation";
  std::vector<double> deltas;          // default 2^-k, k = 4..10
  std::vector<double> probes{0.0, 0.05, 0.1};
  double delta_max = 0.1;

  // [output]
  std::string out_dir = ".";

  double effective_tol() const {
    double h = 1.0 / static_cast<double>(n_fiber - 1);
    double q = 2.0 * std::pow(h, zeta);
    return tol > 0.0 ? tol : std::max(1e-6, q);
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("bad number '" + tok + "' in key '" + key + "'");
    }
  }
  return out;
}

}  // namespace detail

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  bool tol_set = false;

  auto need_double = [&](const std::string& v, const std::string& key) {
    try {
      std::size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ParseError("bad number '" + v + "' for key '" + key + "'");
    }
  };
  auto need_size = [&](const std::string& v, const std::string& key) -> std::size_t {
    try {
      std::size_t used = 0;
      long long d = std::stoll(v, &used);
      if (used != v.size() || d < 0) throw std::invalid_argument(v);
      return static_cast<std::size_t>(d);
    } catch (const std::exception&) {
      throw ParseError("bad integer '" + v + "' for key '" + key + "'");
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ParseError("line " + std::to_string(lineno) + ": malformed section header");
      section = t.substr(1, t.size() - 2);
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(t.substr(0, eq));
    std::string val = detail::trim(t.substr(eq + 1));
    std::string full = section.empty() ? key : section + "." + key;

    if (full == "system.base_family") cfg.base_family = val;
    else if (full == "system.k") cfg.base_k = need_size(val, full);
    else if (full == "system.c") cfg.base_c = need_double(val, full);
    else if (full == "system.eps_rho") cfg.eps_rho = need_double(val, full);
    else if (full == "system.fiber_family") cfg.fiber_family = val;
    else if (full == "system.alpha") cfg.alpha = need_double(val, full);
    else if (full == "system.offset") cfg.fiber_offset = val;
    else if (full == "system.zeta") cfg.zeta = need_double(val, full);
    else if (full == "grids.n_base") cfg.n_base = need_size(val, full);
    else if (full == "grids.n_fiber") cfg.n_fiber = need_size(val, full);
    else if (full == "grids.atom_cap") cfg.atom_cap = need_size(val, full);
    else if (full == "grids.lp_cap") cfg.lp_cap = need_size(val, full);
    else if (full == "solver.tol") { cfg.tol = need_double(val, full); tol_set = true; }
    else if (full == "solver.max_iter") cfg.max_iter = need_size(val, full);
    else if (full == "solver.seed") cfg.seed = static_cast<std::uint64_t>(need_size(val, full));
    else if (full == "solver.pair_budget") cfg.pair_budget = need_size(val, full);
    else if (full == "perturbation.kind") cfg.perturb_kind = val;
    else if (full == "perturbation.deltas") cfg.deltas = detail::parse_list(val, full);
    else if (full == "perturbation.probes") cfg.probes = detail::parse_list(val, full);
    else if (full == "perturbation.delta_max") cfg.delta_max = need_double(val, full);
    else if (full == "output.dir") cfg.out_dir = val;
    else throw ValidationError("unknown key '" + full + "'");
  }

  // Validation.
  if (!(cfg.zeta > 0.0 && cfg.zeta <= 1.0))
    throw ValidationError("zeta must be in (0,1], got key 'system.zeta'");
  if (cfg.n_base < 2) throw ValidationError("grids.n_base must be >= 2");
  if (cfg.n_fiber < 2) throw ValidationError("grids.n_fiber must be >= 2");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ValidationError("system.alpha must be in (0,1)");
  if (cfg.base_family != "linear")
    throw ValidationError("unknown base family in 'system.base_family'");
  if (cfg.fiber_family != "affine")
    throw ValidationError("unknown fiber family in 'system.fiber_family'");
  if (cfg.base_k < 2) throw ValidationError("system.k must be >= 2");
  if (tol_set && cfg.tol <= 0.0) throw ValidationError("solver.tol must be > 0");
  if (cfg.perturb_kind != "fiber-translation" && cfg.perturb_kind != "base-rotation" &&
      cfg.perturb_kind != "composite")
    throw ValidationError("unknown 'perturbation.kind'");
  if (cfg.deltas.empty())
    for (int k = 4; k <= 10; ++k) cfg.deltas.push_back(std::pow(2.0, -k));
  for (double d : cfg.deltas)
    if (!(d > 0.0 && d <= cfg.delta_max))
      throw ValidationError("value outside (0, delta_max] in 'perturbation.deltas'");
  for (double d : cfg.probes)
    if (!(d >= 0.0 && d <= cfg.delta_max))
      throw ValidationError("value outside [0, delta_max] in 'perturbation.probes'");
  return cfg;
}

}  // namespace skewstab

#endif  // SKEWSTAB_CONFIG_HPP
