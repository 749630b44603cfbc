// Command-line front end: wnl <command> [--config PATH] [flags].
//
// Settings are applied in order: built-in defaults, the config file, then
// flags. Exit codes: 0 all checks pass, 1 a check failed, 2 input error.

#include <wnl/app.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Willmore neck lab"};
  app.require_subcommand(1, 1);

  std::string config_path, out, grid, trange, q_list;
  std::optional<unsigned> seed;
  std::optional<double> L, tol_defect, tol_residue;
  std::optional<int> segments;

  const std::map<std::string, std::string> about{
      {"analyze", "geometry, identities and Willmore energy of one surface"},
      {"residues", "tau1 and tau2 residues over a set of stations"},
      {"three-circle", "segment energies, three-circle verdicts and ladder bounds"},
      {"decay-fit", "fit the decay rate of segment energies"},
      {"harmonic-lab", "harmonic-expansion thresholds and randomized L0 search"},
      {"synthesize", "gradient descent on the Willmore energy from a seed"},
  };
  for (const std::string& name : wnl::command_names()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--out", out, "output directory for report.json and CSV tables");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--grid", grid, "n_t,n_theta");
    sub->add_option("--trange", trange, "t_min,t_max");
    sub->add_option("--q", q_list, "comma-separated q values");
    sub->add_option("--L", L, "segment length");
    sub->add_option("--segments", segments, "number of segments");
    sub->add_option("--tol-defect", tol_defect, "conformal defect tolerance");
    sub->add_option("--tol-residue", tol_residue, "absolute residue tolerance");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  wnl::RunConfig cfg;
  try {
    if (!config_path.empty()) wnl::load_config_file(config_path, cfg);
    auto set = [&](const char* key, const std::string& value) {
      if (!value.empty()) wnl::apply_setting(cfg, key, value);
    };
    set("out", out);
    set("grid", grid);
    set("trange", trange);
    set("q", q_list);
    if (seed) cfg.seed = *seed;
    if (L) cfg.L = *L;
    if (segments) cfg.segments = *segments;
    if (tol_defect) cfg.tol_defect = *tol_defect;
    if (tol_residue) cfg.tol_residue = *tol_residue;
  } catch (const wnl::Error& e) {
    std::cerr << "wnl " << command << ": " << e.what() << '\n';
    return 2;
  }
  const int code = wnl::run(command, cfg, std::cerr);
  if (code != 2) std::cout << "wnl " << command << ": report written to " << cfg.out << (code == 0 ? " (all checks pass)" : " (some checks failed)") << '\n';
  return code;
}
