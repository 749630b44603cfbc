#include <wnl/app.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wnl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("wnl_test_" + name);
  fs::remove_all(d);
  return d;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream is(p);
  return nlohmann::json::parse(is);
}

} // namespace

TEST(Config, ParsesSettingsCommentsAndLists) {
  const auto c = parse_config_text(
      "# sphere run\n"
      "example = sphere\n"
      "trange = -2, 6   # inline comment\n"
      "grid = 257, 32\n"
      "q = 1, 1.5,1.9\n"
      "residues = off\n"
      "expected_nonzero = tau1[e3], tau2[e1^e2]\n"
      "\n"
      "seed = 42\n");
  EXPECT_EQ(c.example.kind, ExampleKind::sphere);
  EXPECT_EQ(c.t_min, -2.0);
  EXPECT_EQ(c.t_max, 6.0);
  EXPECT_EQ(c.n_t, 257);
  EXPECT_EQ(c.n_theta, 32);
  EXPECT_EQ(c.q, (std::vector<double>{1.0, 1.5, 1.9}));
  EXPECT_FALSE(c.residues);
  EXPECT_EQ(c.expected_nonzero, (std::vector<std::string>{"tau1[e3]", "tau2[e1^e2]"}));
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, RejectsUnknownKeysWithLineNumber) {
  try {
    parse_config_text("example = sphere\ncolour = blue\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config_text("example sphere\n"), ConfigError);
  EXPECT_THROW(parse_config_text("L = \n"), ConfigError);
  EXPECT_THROW(parse_config_text("L = 1\nL = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("L = one\n"), ConfigError);
  EXPECT_THROW(parse_config_text("L = nan\n"), ConfigError);
  EXPECT_THROW(parse_config_text("n_t = 3.5\n"), ConfigError);
  EXPECT_THROW(parse_config_text("grid = 65\n"), ConfigError);
  EXPECT_THROW(parse_config_text("example = torus\n"), ConfigError);
  EXPECT_THROW(parse_config_text("residues = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config_text("energy = B\n"), ConfigError);
  EXPECT_THROW(parse_config_text("expected_nonzero = tau3[e1]\n"), ConfigError);
}

TEST(Config, ValidatesAcrossFields) {
  EXPECT_THROW(parse_config_text("n_theta = 15\n"), ConfigError);
  EXPECT_THROW(parse_config_text("trange = 2, 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("fit_lo = 5\nfit_hi = 5\n"), ConfigError);
  EXPECT_THROW(parse_config_text("segments = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("q = 1, -1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("harmonic_m = 3\nk_max = 2\n"), ConfigError);
  EXPECT_NO_THROW(parse_config_text(""));
}

TEST(Config, LaterSettingsOverride) {
  RunConfig c;
  std::istringstream is("L = 2\n");
  parse_config(is, c);
  apply_setting(c, "L", "3");
  EXPECT_EQ(c.L, 3.0);
  EXPECT_THROW(apply_setting(c, "no_such_key", "1"), ConfigError);
}

TEST(Report, SchemaHasStableTopLevelKeys) {
  Report r;
  r.meta = {{"tool", "wnl"}};
  r.at_most("a", 1.0, 2.0, "closed form");
  r.at_least("b", 1.0, 2.0, "closed form");
  const auto j = r.to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"meta", "inputs", "results", "checks"}));
  ASSERT_EQ(j["checks"].size(), 2u);
  for (const auto& ch : j["checks"])
    for (const char* k : {"name", "value", "tolerance", "pass", "provenance"}) EXPECT_TRUE(ch.contains(k)) << k;
  EXPECT_TRUE(j["checks"][0]["pass"].get<bool>());
  EXPECT_FALSE(j["checks"][1]["pass"].get<bool>());
  EXPECT_EQ(r.exit_code(), 1);
}

TEST(Cli, ThreeCircleOnSphere) {
  auto c = parse_config_text("example = sphere\ntrange = 0, 12\ngrid = 1537, 64\nL = 1\nsegments = 12\nq = 1.5\n");
  c.out = fresh_dir("sphere").string();
  std::ostringstream err;
  ASSERT_EQ(run("three-circle", c, err), 0) << err.str();
  const auto j = read_json(fs::path(c.out) / "report.json");
  const auto phi = j["results"]["phi_A"].get<std::vector<double>>();
  ASSERT_EQ(phi.size(), 12u);
  for (int i = 1; i <= 12; ++i) EXPECT_NEAR(phi[i - 1], 4 * std::numbers::pi * (std::tanh(i) - std::tanh(i - 1.0)), 1e-6);
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "segments.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "verdicts.csv"));
  EXPECT_EQ(j["meta"]["seed"].get<unsigned>(), c.seed);
}

TEST(Cli, InvertedCatenoidResiduesFlagExpectedNonzero) {
  auto c = parse_config_text(
      "example = inverted_catenoid\ntrange = 1, 5\ngrid = 257, 64\nstations = 1.5, 2, 3, 4\n"
      "expected_nonzero = tau1[e3]\n");
  c.out = fresh_dir("invcat").string();
  std::ostringstream err;
  ASSERT_EQ(run("residues", c, err), 0) << err.str();
  const auto j = read_json(fs::path(c.out) / "report.json");
  bool found = false;
  for (const auto& e : j["results"]["entries"])
    if (e["label"] == "tau1[e3]") {
      found = true;
      EXPECT_EQ(e["flag"], "expected-nonzero");
      EXPECT_NEAR(e["mean"].get<double>(), -16 * std::numbers::pi, 1e-3);
    }
  EXPECT_TRUE(found);
}

TEST(Cli, UnflaggedNonzeroResidueFailsCheck) {
  auto c = parse_config_text("example = inverted_catenoid\ntrange = 1, 5\ngrid = 257, 64\nstations = 1.5, 2, 3, 4\n");
  c.out = fresh_dir("invcat_unflagged").string();
  std::ostringstream err;
  EXPECT_EQ(run("residues", c, err), 1);
  EXPECT_NE(err.str().find("tau1[e3]"), std::string::npos);
}

TEST(Cli, InputErrorsExitTwoWithoutOutput) {
  RunConfig c;
  c.out = fresh_dir("bad").string();
  std::ostringstream err;
  EXPECT_EQ(run("no-such-command", c, err), 2);
  c.segments = 500; // leaves the grid
  EXPECT_EQ(run("three-circle", c, err), 2);
  c = RunConfig{};
  c.out = fresh_dir("bad").string();
  c.expected_nonzero = {"tau1[e9]"};
  EXPECT_EQ(run("residues", c, err), 2);
  EXPECT_FALSE(fs::exists(c.out));
}

TEST(Cli, DecayFitOnCatenoid) {
  auto c = parse_config_text("example = catenoid\ntrange = 0, 12\ngrid = 1537, 64\nfit_lo = 3\nfit_hi = 10\n");
  c.out = fresh_dir("decay").string();
  std::ostringstream err;
  ASSERT_EQ(run("decay-fit", c, err), 0) << err.str();
  const auto j = read_json(fs::path(c.out) / "report.json");
  EXPECT_GE(j["results"]["q_hat"].get<double>(), 1.98);
}

TEST(Cli, AnalyzeCatalogSurfaces) {
  for (const char* ex : {"sphere", "catenoid", "flat_cover"}) {
    auto c = parse_config_text(std::string("example = ") + ex + "\ntrange = -2, 2\ngrid = 257, 32\n");
    c.out = fresh_dir(std::string("analyze_") + ex).string();
    std::ostringstream err;
    EXPECT_EQ(run("analyze", c, err), 0) << ex << ": " << err.str();
  }
}

TEST(Cli, HarmonicLabIsDeterministic) {
  auto c = parse_config_text("q = 1, 1.5\ntrials = 200\nL = 1\n");
  std::string texts[2];
  for (int k = 0; k < 2; ++k) {
    c.out = fresh_dir("harm" + std::to_string(k)).string();
    std::ostringstream err;
    ASSERT_EQ(run("harmonic-lab", c, err), 0) << err.str();
    std::ifstream is(fs::path(c.out) / "report.json");
    texts[k] = std::string(std::istreambuf_iterator<char>(is), {});
  }
  EXPECT_EQ(texts[0], texts[1]);
}

TEST(Cli, SynthesizeWritesTrace) {
  auto c = parse_config_text(
      "example = catenoid\ntrange = -2, 2\ngrid = 41, 16\nperturb_amplitude = 0.01\nmax_iter = 20\ndrift_tol = 1\n");
  c.out = fresh_dir("synth").string();
  std::ostringstream err;
  EXPECT_EQ(run("synthesize", c, err), 0) << err.str();
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "trace.csv"));
  EXPECT_NO_THROW(load_immersion((fs::path(c.out) / "synthesized.wnl").string()));
}
