#pragma once

// Pipelines behind the `wnl` subcommands and the report they produce.
//
// Every command returns a Report: a JSON document with the top-level keys
// {meta, inputs, results, checks} plus zero or more CSV tables. Exit codes:
// 0 when every check passes, 1 when some check fails, 2 for input errors.

#include <wnl/catalog.hpp>
#include <wnl/config.hpp>
#include <wnl/geometry.hpp>
#include <wnl/harmonic_lab.hpp>
#include <wnl/neck_analysis.hpp>
#include <wnl/optimizer.hpp>
#include <wnl/residues.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace wnl {

inline constexpr const char* tool_version = "1.0.0";

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string provenance;
  std::string expectation; // "at-most", "at-least", "expected-nonzero", "holds"
};

struct CsvTable {
  std::string file;
  std::string content;
};

struct Report {
  std::string command;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::vector<Check> checks;
  std::vector<CsvTable> tables;

  // value <= tolerance
  void at_most(std::string name, double value, double tol, std::string provenance) {
    checks.push_back({std::move(name), value, tol, value <= tol, std::move(provenance), "at-most"});
  }
  // value >= tolerance
  void at_least(std::string name, double value, double tol, std::string provenance) {
    checks.push_back({std::move(name), value, tol, value >= tol, std::move(provenance), "at-least"});
  }

  bool all_pass() const {
    for (const Check& c : checks)
      if (!c.pass) return false;
    return true;
  }
  int exit_code() const { return all_pass() ? 0 : 1; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["meta"] = meta;
    j["inputs"] = inputs;
    j["results"] = results;
    j["checks"] = nlohmann::ordered_json::array();
    for (const Check& c : checks)
      j["checks"].push_back({{"name", c.name},
                             {"value", c.value},
                             {"tolerance", c.tolerance},
                             {"pass", c.pass},
                             {"provenance", c.provenance},
                             {"expectation", c.expectation}});
    return j;
  }
};

namespace detail {

// JSON has no infinities or NaNs; they are written as strings.
inline nlohmann::ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline std::string csv_num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["example"] = to_string(c.example.kind);
  if (c.example.kind == ExampleKind::from_file) j["input"] = c.example.path;
  j["m"] = c.example.m;
  j["scale"] = c.example.scale;
  j["ambient_dim"] = c.example.ambient_dim;
  j["center"] = c.example.center;
  j["graph_amplitude"] = c.example.graph_amplitude;
  j["graph_mode"] = c.example.graph_mode;
  j["graph_sign"] = c.example.graph_sign;
  j["perturb_amplitude"] = c.perturb_amplitude;
  j["perturb_k"] = c.perturb_mode.k;
  j["perturb_phase"] = c.perturb_mode.phase;
  j["perturb_center"] = c.perturb_mode.center;
  j["perturb_width"] = c.perturb_mode.width;
  j["grid"] = {{"t_min", c.t_min}, {"t_max", c.t_max}, {"n_t", c.n_t}, {"n_theta", c.n_theta}};
  j["residues"] = c.residues;
  j["stations"] = c.stations;
  j["expected_nonzero"] = c.expected_nonzero;
  j["L"] = c.L;
  j["segments"] = c.segments;
  j["t_start"] = c.start();
  j["q"] = c.q;
  j["q_prime"] = c.q_prime ? nlohmann::ordered_json(*c.q_prime) : nlohmann::ordered_json("q/2");
  j["delta"] = c.delta;
  j["fit_window"] = {c.fit_lo, c.fit_hi};
  j["energy"] = to_string(c.energy);
  j["tolerances"] = {{"defect", c.tol_defect},
                     {"residue", c.tol_residue},
                     {"residue_relative", c.rel_tol_residue},
                     {"closed_form", c.tol_closed_form}};
  j["harmonic"] = {{"m", c.harmonic_m}, {"trials", c.trials}, {"k_max", c.k_max}};
  j["descent"] = {{"max_iter", c.max_iter}, {"grad_tol", c.grad_tol}, {"drift_tol", c.drift_tol}};
  return j;
}

inline ImmersionField build_surface(const RunConfig& c) {
  ExampleSpec spec = c.example;
  if (c.perturb_amplitude != 0.0) spec.perturbation = Perturbation{c.perturb_amplitude, c.perturb_mode};
  return make_example(spec, c.grid());
}

inline bool is_unperturbed(const RunConfig& c, ExampleKind k) {
  return c.example.kind == k && c.perturb_amplitude == 0.0;
}

inline std::vector<double> default_stations(const CylinderGrid& g) {
  std::vector<double> s;
  for (int k = 1; k <= 5; ++k) s.push_back(g.t(static_cast<int>(std::lround(k * (g.n_t() - 1) / 6.0))));
  return s;
}

inline Report new_report(const std::string& command, const RunConfig& c) {
  Report r;
  r.command = command;
  r.meta = {{"tool", "wnl"}, {"version", tool_version}, {"command", command}, {"seed", c.seed}};
  r.inputs = config_json(c);
  return r;
}

inline std::string residue_label_tau1(int c) { return "tau1[e" + std::to_string(c + 1) + "]"; }
inline std::string residue_label_tau2(int i, int j) {
  return "tau2[e" + std::to_string(i + 1) + "^e" + std::to_string(j + 1) + "]";
}

} // namespace detail

// Geometry summary and the invariant checks that apply to the input.
inline Report run_analyze(const RunConfig& c) {
  Report r = detail::new_report("analyze", c);
  const ImmersionField imm = detail::build_surface(c);
  const FundamentalForms F = fundamental_forms(imm);
  const GaussMapField G = gauss_map(imm, F);
  const double defect = F.max_defect();
  const bool conformal = defect <= c.tol_defect;

  const double energy_N = cylinder_integral(G.energy_density);
  const double total_A = total_curvature(F);
  const PohozaevGap P = pohozaev_gap(F, G);
  auto& res = r.results;
  res["ambient_dim"] = imm.ambient_dim();
  res["exact_jets"] = imm.exact_jets();
  res["willmore_energy"] = willmore_energy(F);
  res["total_curvature"] = total_A;
  res["gauss_map_energy"] = energy_N;
  res["conformal_defect"] = defect;
  res["winding"] = {{"m", F.winding}, {"raw", F.winding_raw}, {"ambiguous", F.winding_ambiguous}};
  res["pohozaev"] = {{"max_ratio", P.max_ratio}, {"identity_error", P.identity_error}};

  if (conformal) {
    r.at_most("gap_identity", P.identity_error, 1e-10, "pointwise identity of the Gauss-map gap in conformal gauge");
    r.at_most("conformal_defect", defect, c.tol_defect, "configured gauge tolerance");
    const double rel = std::abs(energy_N - total_A) / std::max(std::abs(total_A), 1e-300);
    r.at_most("energy_identity", total_A > 1e-14 ? rel : std::abs(energy_N - total_A), total_A > 1e-14 ? 1e-8 : 1e-14,
              "Dirichlet energy of the Gauss map equals total curvature in conformal gauge");
    const ElResidual el = el_residual(imm, F, c.tol_defect);
    res["el_residual_max_interior"] = el.max_interior;
    const GaussTension T = gauss_tension(imm, F, G, c.tol_defect);
    res["gauss_tension"] = {{"max_tension", T.max_tension}, {"max_dperp_H", T.max_dperpH}, {"max_norm_ratio", T.max_norm_ratio}};
    res["pohozaev"]["conformal_bound"] = std::sqrt(2.0);
    r.at_most("pohozaev_ratio", P.max_ratio, std::sqrt(2.0) * (1.0 + 1e-9), "pointwise estimate in conformal gauge");
  } else {
    res["el_residual_max_interior"] = "skipped: input is not conformal within tol_defect";
    res["gauss_tension"] = "skipped: input is not conformal within tol_defect";
  }
  if (detail::is_unperturbed(c, ExampleKind::catenoid) || detail::is_unperturbed(c, ExampleKind::sphere)) {
    const double W = willmore_energy(F);
    if (c.example.kind == ExampleKind::catenoid) {
      r.at_most("willmore_energy", W, c.tol_closed_form, "closed form: minimal surface");
    } else {
      const double exact = 8.0 * std::numbers::pi * (std::tanh(c.t_max) - std::tanh(c.t_min));
      r.at_most("willmore_energy_error", std::abs(W - exact), c.tol_closed_form, "closed form 8pi(tanh b - tanh a)");
    }
  }
  return r;
}

inline Report run_residues(const RunConfig& c) {
  Report r = detail::new_report("residues", c);
  if (!c.residues) {
    r.results["residues"] = "disabled";
    return r;
  }
  const ImmersionField imm = detail::build_surface(c);
  const FundamentalForms F = fundamental_forms(imm);
  ResidueOptions opt;
  opt.defect_tol = c.tol_defect;
  opt.abs_tol = c.tol_residue;
  opt.rel_tol = c.rel_tol_residue;
  const std::vector<double> stations = c.stations.empty() ? detail::default_stations(imm.grid()) : c.stations;
  const ResidueReport R = residue_sweep(imm, F, stations, opt);
  const double zero_tol = std::max(opt.abs_tol, opt.rel_tol * R.scale_used);

  std::vector<std::pair<std::string, const std::vector<double>*>> rows;
  for (int k = 0; k < R.ambient_dim; ++k) rows.emplace_back(detail::residue_label_tau1(k), &R.tau1[k]);
  for (std::size_t k = 0; k < R.pairs.size(); ++k)
    rows.emplace_back(detail::residue_label_tau2(R.pairs[k].first, R.pairs[k].second), &R.tau2[k]);

  for (const auto& label : c.expected_nonzero) {
    bool known = false;
    for (const auto& row : rows) known = known || row.first == label;
    if (!known) throw ConfigError("expected_nonzero label '" + label + "' does not name a residue of this surface");
  }

  r.results["stations"] = R.stations;
  r.results["scale"] = R.scale;
  r.results["zero_threshold"] = zero_tol;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << "label,station_t,value\n";
  for (const auto& [label, values] : rows) {
    double lo = (*values)[0], hi = lo, max_abs = 0.0, min_abs = std::abs(lo), mean = 0.0;
    for (double v : *values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      max_abs = std::max(max_abs, std::abs(v));
      min_abs = std::min(min_abs, std::abs(v));
      mean += v / values->size();
    }
    const bool expect_nonzero =
        std::find(c.expected_nonzero.begin(), c.expected_nonzero.end(), label) != c.expected_nonzero.end();
    entries.push_back({{"label", label},
                       {"values", *values},
                       {"mean", mean},
                       {"t_variation", hi - lo},
                       {"flag", expect_nonzero ? "expected-nonzero" : "expected-zero"}});
    for (std::size_t s = 0; s < values->size(); ++s) csv << label << ',' << detail::csv_num(R.stations[s]) << ',' << detail::csv_num((*values)[s]) << '\n';
    if (expect_nonzero) {
      Check ch{label, min_abs, 10.0 * zero_tol, min_abs > 10.0 * zero_tol, "configured expectation: nonzero residue",
               "expected-nonzero"};
      r.checks.push_back(ch);
      r.at_most(label + " t-variation", hi - lo, c.rel_tol_residue * std::abs(mean),
                "conservation law: residue is independent of the circle");
    } else {
      r.at_most(label, max_abs, zero_tol, "conservation law: residue vanishes");
      r.at_most(label + " t-variation", hi - lo, zero_tol, "conservation law: residue is independent of the circle");
    }
  }
  r.results["entries"] = entries;
  r.tables.push_back({"residues.csv", csv.str()});
  return r;
}

inline Report run_three_circle(const RunConfig& c) {
  Report r = detail::new_report("three-circle", c);
  const ImmersionField imm = detail::build_surface(c);
  const FundamentalForms F = fundamental_forms(imm);
  const SegmentProfile p = segment_energies(F, c.L, c.segments, c.start());

  std::ostringstream seg;
  seg << "i,t_lo,t_hi,phi_A,phi_H,ratio_H_over_A,sup_grad_v\n";
  for (int i = 1; i <= p.k; ++i)
    seg << i << ',' << detail::csv_num(p.t_start + (i - 1) * p.L) << ',' << detail::csv_num(p.t_start + i * p.L) << ','
        << detail::csv_num(p.phi_A[i - 1]) << ',' << detail::csv_num(p.phi_H[i - 1]) << ','
        << detail::csv_num(p.ratio_H_over_A[i - 1]) << ',' << detail::csv_num(p.sup_grad_v[i - 1]) << '\n';
  r.tables.push_back({"segments.csv", seg.str()});
  r.results["phi_A"] = p.phi_A;
  r.results["phi_H"] = p.phi_H;
  nlohmann::ordered_json ratio = nlohmann::ordered_json::array();
  for (double x : p.ratio_H_over_A) ratio.push_back(detail::num(x));
  r.results["ratio_H_over_A"] = ratio;
  r.results["sup_grad_v"] = p.sup_grad_v;

  if (detail::is_unperturbed(c, ExampleKind::sphere) || detail::is_unperturbed(c, ExampleKind::catenoid)) {
    double err = 0.0;
    for (int i = 1; i <= p.k; ++i) {
      const double a = p.t_start + (i - 1) * p.L, b = p.t_start + i * p.L;
      err = std::max(err, std::abs(p.phi_A[i - 1] - 4.0 * std::numbers::pi * (std::tanh(b) - std::tanh(a))));
    }
    r.at_most("phi_A_closed_form", err, c.tol_closed_form, "closed form 4pi(tanh b - tanh a)");
  }

  std::ostringstream ver;
  ver << "q,i,holds,lhs,rhs,margin\n";
  nlohmann::ordered_json per_q = nlohmann::ordered_json::array();
  for (double q : c.q) {
    const auto v = three_circle_verdict(p, c.energy, q);
    const int i0 = onset_index(v);
    nlohmann::ordered_json vj = nlohmann::ordered_json::array();
    for (const auto& s : v) {
      vj.push_back({{"i", s.i}, {"holds", s.holds}, {"lhs", s.lhs}, {"rhs", s.rhs}, {"margin", s.margin}});
      ver << detail::csv_num(q) << ',' << s.i << ',' << (s.holds ? 1 : 0) << ',' << detail::csv_num(s.lhs) << ','
          << detail::csv_num(s.rhs) << ',' << detail::csv_num(s.margin) << '\n';
    }
    nlohmann::ordered_json qj{{"q", q}, {"energy", to_string(c.energy)}, {"verdicts", vj}, {"onset_index", i0}};
    const double qp = c.q_prime.value_or(0.5 * q);
    try {
      const LadderBound lb = ladder_decay(p, c.energy, q, qp);
      qj["ladder"] = {{"q_prime", qp},
                      {"ok", lb.ok},
                      {"violating_index", lb.violating_index},
                      {"C", lb.C},
                      {"C_observed", detail::num(lb.C_observed)},
                      {"verified", lb.verified},
                      {"bound", lb.bound}};
    } catch (const ParameterError& e) {
      qj["ladder"] = {{"q_prime", qp}, {"applicable", false}, {"reason", e.what()}};
    }
    per_q.push_back(qj);
    std::ostringstream name;
    name << "onset_exists[q=" << q << "]";
    r.checks.push_back({name.str(), static_cast<double>(i0), 0.0, i0 >= 0,
                        "three-circle inequality holds beyond some segment", "holds"});
  }
  r.results["three_circle"] = per_q;
  r.tables.push_back({"verdicts.csv", ver.str()});

  std::ostringstream dom;
  dom << "i,label,sum_A,sum_H\n";
  nlohmann::ordered_json dj = nlohmann::ordered_json::array();
  for (const auto& d : h_vs_a_ratio(p, c.delta)) {
    dj.push_back({{"i", d.i}, {"label", to_string(d.label)}, {"sum_A", d.sum_A}, {"sum_H", d.sum_H}});
    dom << d.i << ',' << to_string(d.label) << ',' << detail::csv_num(d.sum_A) << ',' << detail::csv_num(d.sum_H) << '\n';
  }
  r.results["dominance"] = dj;
  r.tables.push_back({"dominance.csv", dom.str()});
  return r;
}

inline Report run_decay_fit(const RunConfig& c) {
  Report r = detail::new_report("decay-fit", c);
  const ImmersionField imm = detail::build_surface(c);
  const FundamentalForms F = fundamental_forms(imm);
  const SegmentProfile p = segment_energies(F, c.L, c.segments, c.start());
  if (c.fit_hi > p.k) throw ConfigError("fit_hi exceeds the number of segments");
  const DecayFit d = decay_fit(p, c.energy, c.fit_lo, c.fit_hi);
  r.results = {{"energy", to_string(c.energy)},
               {"phi", p.phi(c.energy)},
               {"q_hat", d.q_hat},
               {"C_left", d.C_left},
               {"C_right", d.C_right},
               {"rms_log_residual", d.rms_log_residual},
               {"rss", d.rss},
               {"window", {d.i_lo, d.i_hi}}};
  std::ostringstream csv;
  csv << "i,phi,model\n";
  for (int i = d.i_lo; i <= d.i_hi; ++i) {
    const double model = d.C_left * std::exp(-d.q_hat * (i - 1) * c.L) + d.C_right * std::exp(-d.q_hat * (p.k - i) * c.L);
    csv << i << ',' << detail::csv_num(p.phi(c.energy)[i - 1]) << ',' << detail::csv_num(model) << '\n';
  }
  r.tables.push_back({"decay_fit.csv", csv.str()});
  const bool known_rate = (detail::is_unperturbed(c, ExampleKind::sphere) || detail::is_unperturbed(c, ExampleKind::catenoid)) &&
                          c.energy == EnergyKind::A && c.start() >= 0.0;
  if (known_rate) {
    r.at_least("q_hat_lower", d.q_hat, 1.98, "closed form: segment energies decay like e^{-2t}");
    r.at_most("q_hat_upper", d.q_hat, 2.0, "closed form: segment energies decay like e^{-2t}");
  }
  return r;
}

inline Report run_harmonic_lab(const RunConfig& c) {
  Report r = detail::new_report("harmonic-lab", c);
  if (c.trials < 100) throw ConfigError("harmonic-lab needs trials >= 100");
  nlohmann::ordered_json per_q = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << "q,two_mode_threshold,empirical_L0,worst_relative_margin\n";
  for (double q : c.q) {
    if (!(q < 2.0)) throw ConfigError("harmonic-lab needs every q below 2");
    nlohmann::ordered_json qj{{"q", q}};
    const double thr = two_mode_threshold(q, 1);
    qj["two_mode_threshold"] = thr;
    const EmpiricalL0 e = empirical_L0_search(c.harmonic_m, q, c.trials, c.seed, c.k_max);
    qj["empirical_L0"] = detail::num(e.L0);
    qj["found"] = e.found;
    qj["worst_relative_margin"] = detail::num(e.worst_relative_margin);
    std::ostringstream tag;
    tag << "[q=" << q << "]";
    if (e.found) {
      const auto pool = harmonic_trial_pool(c.harmonic_m, c.trials, c.seed + 1, c.k_max);
      int fails = 0;
      for (const auto& h : pool)
        if (!check_harmonic_three_circle(h, e.L0 + 0.5, q).holds) ++fails;
      qj["fresh_pool_failures_at_L0_plus_half"] = fails;
      r.at_most("fresh_pool_failures" + tag.str(), fails, 0.0,
                "empirical threshold checked on an independent pool at L0 + 0.5");
    }
    // u = e^{mt} cos(m theta): Phi_i = pi L for every i, so the inequality
    // holds exactly when e^{-qL} > 1/2.
    HarmonicExpansion ob(c.harmonic_m, c.harmonic_m);
    ob.bk[c.harmonic_m] = 1.0;
    const HarmonicVerdict v = check_harmonic_three_circle(ob, c.L, q);
    const bool expected = std::exp(-q * c.L) > 0.5;
    qj["obstruction"] = {{"L", c.L}, {"holds", v.holds}, {"expected", expected}, {"lhs", v.lhs}, {"rhs", v.rhs}};
    r.checks.push_back({"obstruction_verdict" + tag.str(), v.holds ? 1.0 : 0.0, expected ? 1.0 : 0.0, v.holds == expected,
                        "closed form: obstruction mode has flat segment energies", "holds"});
    per_q.push_back(qj);
    csv << detail::csv_num(q) << ',' << detail::csv_num(thr) << ',' << detail::csv_num(e.L0) << ','
        << detail::csv_num(e.worst_relative_margin) << '\n';
  }
  // Closed-form segment energies against direct quadrature.
  std::mt19937_64 rng(c.seed);
  double worst = 0.0;
  for (int t = 0; t < 12; ++t) {
    const HarmonicExpansion h = random_expansion(c.harmonic_m, c.k_max, rng);
    const ThreeCircleProfile cf = weighted_threecircle_closed_form(h, c.L);
    const auto qd = weighted_threecircle_quadrature(h, c.L, 2000);
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(cf.Phi[i] - qd[i]) / std::max(1.0, std::abs(qd[i])));
  }
  r.results["thresholds"] = per_q;
  r.results["closed_form_vs_quadrature"] = worst;
  r.at_most("closed_form_vs_quadrature", worst, 1e-8, "closed-form segment integrals against direct quadrature");
  r.tables.push_back({"harmonic_lab.csv", csv.str()});
  return r;
}

inline Report run_synthesize(const RunConfig& c) {
  Report r = detail::new_report("synthesize", c);
  const ImmersionField seed = detail::build_surface(c);
  DescentOptions opt;
  opt.max_iter = c.max_iter;
  opt.grad_tol = c.grad_tol;
  opt.drift_tol = c.drift_tol;
  const DescentState st = synthesize_neck(seed, opt);
  r.results = {{"status", to_string(st.status)},
               {"message", st.message},
               {"iterations", st.iteration},
               {"W_initial", st.trace.front().W},
               {"W_final", st.W},
               {"grad_norm_initial", st.trace.front().grad_norm},
               {"grad_norm_final", st.grad_norm},
               {"conformal_defect", st.conformal_defect}};
  double worst_armijo = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < st.trace.size(); ++k) {
    const TraceRow& a = st.trace[k - 1];
    const TraceRow& b = st.trace[k];
    worst_armijo = std::max(worst_armijo, b.W - (a.W - opt.armijo * b.step * a.grad_norm * a.grad_norm));
  }
  if (st.trace.size() > 1) r.at_most("armijo_excess", worst_armijo, 0.0, "Armijo decrease on every accepted step");
  const bool halted_badly = st.status == DescentStatus::stalled || st.status == DescentStatus::immersion_lost ||
                            st.status == DescentStatus::gauge_drift;
  r.checks.push_back({"descent_status", halted_badly ? 1.0 : 0.0, 0.0, !halted_badly, "descent terminated normally", "holds"});
  std::ostringstream csv;
  write_trace_csv(st.trace, csv);
  r.tables.push_back({"trace.csv", csv.str()});
  std::ostringstream surf;
  save_immersion(st.imm, surf);
  r.tables.push_back({"synthesized.wnl", surf.str()});
  return r;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"analyze", "residues", "three-circle", "decay-fit", "harmonic-lab", "synthesize"};
  return names;
}

inline Report run_command(const std::string& command, const RunConfig& c) {
  if (command == "analyze") return run_analyze(c);
  if (command == "residues") return run_residues(c);
  if (command == "three-circle") return run_three_circle(c);
  if (command == "decay-fit") return run_decay_fit(c);
  if (command == "harmonic-lab") return run_harmonic_lab(c);
  if (command == "synthesize") return run_synthesize(c);
  throw ConfigError("unknown command '" + command + "'");
}

inline void write_report(const Report& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream os(fs::path(dir) / "report.json");
    os << std::setw(2) << r.to_json() << '\n';
    if (!os) throw ConfigError("cannot write report to '" + dir + "'");
  }
  for (const CsvTable& t : r.tables) {
    std::ofstream os(fs::path(dir) / t.file);
    os << t.content;
    if (!os) throw ConfigError("cannot write '" + t.file + "' to '" + dir + "'");
  }
}

// Runs a command end to end. Nothing is written unless the pipeline finishes.
inline int run(const std::string& command, const RunConfig& c, std::ostream& err) {
  Report r;
  try {
    validate(c);
    r = run_command(command, c);
  } catch (const Error& e) {
    err << "wnl " << command << ": " << e.what() << '\n';
    return 2;
  }
  try {
    write_report(r, c.out);
  } catch (const std::exception& e) {
    err << "wnl " << command << ": " << e.what() << '\n';
    return 2;
  }
  for (const Check& ch : r.checks)
    if (!ch.pass) err << "check failed: " << ch.name << " value " << ch.value << " tolerance " << ch.tolerance << '\n';
  return r.exit_code();
}

} // namespace wnl
