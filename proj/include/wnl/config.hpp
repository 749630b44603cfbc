#pragma once

// Run configuration for the command-line front end.
//
// Grammar of a config file (one setting per line):
//
//   line    := blank | comment | setting
//   comment := '#' anything
//   setting := key '=' value [ '#' anything ]
//   key     := [a-z_][a-z0-9_]*
//   list    := item (',' item)*
//
// Whitespace around keys, values and list items is ignored. A key may appear
// once per file. Unknown keys, malformed values and duplicates are input
// errors; the whole file is parsed and validated before anything runs.

#include <wnl/catalog.hpp>
#include <wnl/neck_analysis.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace wnl {

class ConfigError : public Error {
public:
  using Error::Error;
};

struct RunConfig {
  // surface
  ExampleSpec example;          // example.kind == from_file uses example.path
  double perturb_amplitude = 0.0;
  PerturbMode perturb_mode;

  // grid
  double t_min = -4.0;
  double t_max = 4.0;
  int n_t = 513;
  int n_theta = 64;

  // analysis
  bool residues = true;
  std::vector<double> stations;               // empty: five evenly spread interior stations
  std::vector<std::string> expected_nonzero;  // residue labels such as "tau1[e3]"
  double L = 1.0;
  int segments = 12;
  std::optional<double> t_start;              // default: t_min
  std::vector<double> q{1.0};
  std::optional<double> q_prime;              // default: q / 2
  double delta = 0.1;
  int fit_lo = 3;
  int fit_hi = 10;
  EnergyKind energy = EnergyKind::A;

  // tolerances
  double tol_defect = 1e-6;
  double tol_residue = 1e-6;
  double rel_tol_residue = 1e-4;
  double tol_closed_form = 1e-6;

  // harmonic lab
  unsigned seed = 7;
  int trials = 1000;
  int harmonic_m = 1;
  int k_max = 8;

  // optimizer
  int max_iter = 500;
  double grad_tol = 1e-8;
  double drift_tol = 1e-3;

  std::string out = "wnl_out";

  CylinderGrid grid() const { return CylinderGrid(t_min, t_max, n_t, n_theta); }
  double start() const { return t_start.value_or(t_min); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view s, std::string_view key) {
  s = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(v))
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(s) + "' is not a finite number");
  return v;
}

inline long parse_integer(std::string_view s, std::string_view key) {
  s = trim(s);
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(s) + "' is not an integer");
  return v;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = s.find(',');
    out.push_back(trim(s.substr(0, c)));
    if (c == std::string_view::npos) break;
    s = s.substr(c + 1);
  }
  return out;
}

inline std::vector<double> parse_real_list(std::string_view s, std::string_view key) {
  std::vector<double> out;
  for (auto item : split_list(s)) out.push_back(parse_real(item, key));
  return out;
}

inline bool parse_bool(std::string_view s, std::string_view key) {
  s = trim(s);
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("key '" + std::string(key) + "': expected on/off, got '" + std::string(s) + "'");
}

template <std::size_t N>
std::array<double, N> parse_tuple(std::string_view s, std::string_view key) {
  const auto v = parse_real_list(s, key);
  if (v.size() != N)
    throw ConfigError("key '" + std::string(key) + "': expected " + std::to_string(N) + " comma-separated values");
  std::array<double, N> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

inline int to_int(long v, std::string_view key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("key '" + std::string(key) + "': value out of range");
  return static_cast<int>(v);
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

inline const std::map<std::string, Setter, std::less<>>& config_setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto real = [&](const char* k, double RunConfig::*field) {
      t[k] = [field, k](RunConfig& c, std::string_view v) { c.*field = parse_real(v, k); };
    };
    auto integer = [&](const char* k, int RunConfig::*field) {
      t[k] = [field, k](RunConfig& c, std::string_view v) { c.*field = to_int(parse_integer(v, k), k); };
    };
    t["example"] = [](RunConfig& c, std::string_view v) {
      try {
        c.example.kind = parse_example_kind(trim(v));
      } catch (const ParameterError& e) {
        throw ConfigError(std::string("key 'example': ") + e.what());
      }
    };
    t["input"] = [](RunConfig& c, std::string_view v) {
      c.example.kind = ExampleKind::from_file;
      c.example.path = std::string(trim(v));
    };
    t["m"] = [](RunConfig& c, std::string_view v) { c.example.m = to_int(parse_integer(v, "m"), "m"); };
    t["scale"] = [](RunConfig& c, std::string_view v) { c.example.scale = parse_real(v, "scale"); };
    t["ambient_dim"] = [](RunConfig& c, std::string_view v) {
      c.example.ambient_dim = to_int(parse_integer(v, "ambient_dim"), "ambient_dim");
    };
    t["center"] = [](RunConfig& c, std::string_view v) { c.example.center = parse_real_list(v, "center"); };
    t["graph_amplitude"] = [](RunConfig& c, std::string_view v) {
      c.example.graph_amplitude = parse_real(v, "graph_amplitude");
    };
    t["graph_mode"] = [](RunConfig& c, std::string_view v) {
      c.example.graph_mode = to_int(parse_integer(v, "graph_mode"), "graph_mode");
    };
    t["graph_sign"] = [](RunConfig& c, std::string_view v) {
      c.example.graph_sign = to_int(parse_integer(v, "graph_sign"), "graph_sign");
    };
    real("perturb_amplitude", &RunConfig::perturb_amplitude);
    t["perturb_k"] = [](RunConfig& c, std::string_view v) { c.perturb_mode.k = to_int(parse_integer(v, "perturb_k"), "perturb_k"); };
    t["perturb_phase"] = [](RunConfig& c, std::string_view v) { c.perturb_mode.phase = parse_real(v, "perturb_phase"); };
    t["perturb_center"] = [](RunConfig& c, std::string_view v) { c.perturb_mode.center = parse_real(v, "perturb_center"); };
    t["perturb_width"] = [](RunConfig& c, std::string_view v) { c.perturb_mode.width = parse_real(v, "perturb_width"); };

    real("t_min", &RunConfig::t_min);
    real("t_max", &RunConfig::t_max);
    integer("n_t", &RunConfig::n_t);
    integer("n_theta", &RunConfig::n_theta);
    t["grid"] = [](RunConfig& c, std::string_view v) {
      const auto a = parse_tuple<2>(v, "grid");
      c.n_t = to_int(std::lround(a[0]), "grid");
      c.n_theta = to_int(std::lround(a[1]), "grid");
      if (c.n_t != a[0] || c.n_theta != a[1]) throw ConfigError("key 'grid': expected two integers");
    };
    t["trange"] = [](RunConfig& c, std::string_view v) {
      const auto a = parse_tuple<2>(v, "trange");
      c.t_min = a[0];
      c.t_max = a[1];
    };

    t["residues"] = [](RunConfig& c, std::string_view v) { c.residues = parse_bool(v, "residues"); };
    t["stations"] = [](RunConfig& c, std::string_view v) { c.stations = parse_real_list(v, "stations"); };
    t["expected_nonzero"] = [](RunConfig& c, std::string_view v) {
      c.expected_nonzero.clear();
      for (auto item : split_list(v)) {
        if (item.empty()) throw ConfigError("key 'expected_nonzero': empty label");
        c.expected_nonzero.emplace_back(item);
      }
    };
    real("L", &RunConfig::L);
    integer("segments", &RunConfig::segments);
    t["t_start"] = [](RunConfig& c, std::string_view v) { c.t_start = parse_real(v, "t_start"); };
    t["q"] = [](RunConfig& c, std::string_view v) { c.q = parse_real_list(v, "q"); };
    t["q_prime"] = [](RunConfig& c, std::string_view v) { c.q_prime = parse_real(v, "q_prime"); };
    real("delta", &RunConfig::delta);
    integer("fit_lo", &RunConfig::fit_lo);
    integer("fit_hi", &RunConfig::fit_hi);
    t["energy"] = [](RunConfig& c, std::string_view v) {
      v = trim(v);
      if (v == "A") c.energy = EnergyKind::A;
      else if (v == "H") c.energy = EnergyKind::H;
      else throw ConfigError("key 'energy': expected A or H");
    };

    real("tol_defect", &RunConfig::tol_defect);
    real("tol_residue", &RunConfig::tol_residue);
    real("rel_tol_residue", &RunConfig::rel_tol_residue);
    real("tol_closed_form", &RunConfig::tol_closed_form);

    t["seed"] = [](RunConfig& c, std::string_view v) {
      const long s = parse_integer(v, "seed");
      if (s < 0 || s > static_cast<long>(std::numeric_limits<unsigned>::max())) throw ConfigError("key 'seed': out of range");
      c.seed = static_cast<unsigned>(s);
    };
    integer("trials", &RunConfig::trials);
    integer("harmonic_m", &RunConfig::harmonic_m);
    integer("k_max", &RunConfig::k_max);

    integer("max_iter", &RunConfig::max_iter);
    real("grad_tol", &RunConfig::grad_tol);
    real("drift_tol", &RunConfig::drift_tol);
    t["out"] = [](RunConfig& c, std::string_view v) { c.out = std::string(trim(v)); };
    return t;
  }();
  return table;
}

} // namespace detail

// Applies one key = value setting; unknown keys are rejected.
inline void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = detail::config_setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  it->second(cfg, value);
}

// Checks cross-field constraints; called once all settings are in.
inline void validate(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  try {
    (void)c.grid();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (c.example.kind == ExampleKind::from_file && c.example.path.empty()) fail("input path is empty");
  if (!(c.example.scale > 0.0)) fail("scale must be positive");
  if (c.example.ambient_dim < 3) fail("ambient_dim must be at least 3");
  if (!(c.perturb_mode.width > 0.0)) fail("perturb_width must be positive");
  if (!(c.L > 0.0)) fail("L must be positive");
  if (c.segments < 3) fail("segments must be at least 3");
  if (c.q.empty()) fail("q list is empty");
  for (double q : c.q)
    if (!(q > 0.0)) fail("every q must be positive");
  if (c.q_prime && !(*c.q_prime > 0.0)) fail("q_prime must be positive");
  if (!(c.delta > 0.0)) fail("delta must be positive");
  if (c.fit_lo < 1 || c.fit_hi <= c.fit_lo) fail("fit window must satisfy 1 <= fit_lo < fit_hi");
  for (double tol : {c.tol_defect, c.tol_residue, c.rel_tol_residue, c.tol_closed_form, c.drift_tol})
    if (!(tol >= 0.0)) fail("tolerances must be nonnegative");
  if (c.trials < 1) fail("trials must be positive");
  if (c.harmonic_m < 1) fail("harmonic_m must be at least 1");
  if (c.k_max < c.harmonic_m) fail("k_max must be at least harmonic_m");
  if (c.max_iter < 0) fail("max_iter must be nonnegative");
  if (c.out.empty()) fail("out directory is empty");
  for (const auto& label : c.expected_nonzero)
    if (label.rfind("tau1[", 0) != 0 && label.rfind("tau2[", 0) != 0)
      fail("expected_nonzero label '" + label + "' must start with tau1[ or tau2[");
}

// Parses a whole config text into `cfg` (settings override what is already
// there). Errors carry the 1-based line number.
inline void parse_config(std::istream& is, RunConfig& cfg, const std::string& origin = "config") {
  std::set<std::string, std::less<>> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
    s = detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string_view key = detail::trim(s.substr(0, eq));
    const std::string_view value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (value.empty()) throw ConfigError(where + "missing value for '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  parse_config(is, cfg);
  validate(cfg);
  return cfg;
}

inline void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  parse_config(is, cfg, path);
}

} // namespace wnl
