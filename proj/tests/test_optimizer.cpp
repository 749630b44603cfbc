#include <wnl/catalog.hpp>
#include <wnl/optimizer.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace wnl;

namespace {

// Smooth vector field supported in |t| < 1.5 with random low Fourier content.
GridField random_variation(const CylinderGrid& g, int n, std::mt19937& rng) {
  std::normal_distribution<double> N;
  std::vector<double> a(static_cast<std::size_t>(n) * 6);
  for (double& x : a) x = N(rng);
  return GridField::sample(g, n, [&](double t, double th, std::span<double> o) {
    const double b = bump(t / 1.5);
    for (int c = 0; c < n; ++c) {
      const double* q = &a[c * 6];
      o[c] = b * (q[0] + q[1] * std::cos(th) + q[2] * std::sin(th) + q[3] * std::cos(2 * th) + q[4] * std::sin(2 * th) +
                  q[5] * t);
    }
  });
}

double max_fd_mismatch(const ImmersionField& base, int trials, unsigned seed) {
  const FundamentalForms F = fundamental_forms(base);
  const GridField G = willmore_gradient(base, F);
  std::mt19937 rng(seed);
  double worst = 0.0;
  const double eps = 1e-5;
  for (int r = 0; r < trials; ++r) {
    const GridField phi = random_variation(base.grid(), base.ambient_dim(), rng);
    const double Wp = willmore_energy(fundamental_forms(ImmersionField(base.f() + eps * phi)));
    const double Wm = willmore_energy(fundamental_forms(ImmersionField(base.f() - eps * phi)));
    const double fd = (Wp - Wm) / (2 * eps);
    worst = std::max(worst, std::abs(fd - l2_inner(G, phi)) / std::abs(fd));
  }
  return worst;
}

} // namespace

TEST(WillmoreGradient, CatenoidVanishes) {
  CylinderGrid g(-3, 3, 257, 32);
  auto c = catenoid(g);
  EXPECT_LE(willmore_gradient(c, fundamental_forms(c)).max_abs(), 1e-9);
}

TEST(WillmoreGradient, SphereVanishesAtReferenceGrid) {
  CylinderGrid g(-4, 4, 1024, 128);
  auto s = sphere(g);
  EXPECT_LE(willmore_gradient(s, fundamental_forms(s)).max_abs(), 1e-5);
}

TEST(WillmoreGradient, ClampedRowsAreZero) {
  CylinderGrid g(-2, 2, 41, 16);
  auto c = cylinder(g);
  auto G = willmore_gradient(c, fundamental_forms(c));
  for (int i : {0, 1, g.n_t() - 2, g.n_t() - 1})
    for (int j = 0; j < g.n_theta(); ++j) EXPECT_EQ(vec::norm(G.at(i, j)), 0.0);
  EXPECT_GT(G.max_abs(), 0.1);
}

TEST(WillmoreGradient, DefectToleranceIsEnforced) {
  CylinderGrid g(-2, 2, 81, 16);
  auto p = perturb(catenoid(g), 0.01, PerturbMode{1, 0.0, 0.0, 1.0});
  auto F = fundamental_forms(p);
  EXPECT_THROW(willmore_gradient(p, F, 1e-3), ConformalityError);
  EXPECT_NO_THROW(willmore_gradient(p, F));
}

TEST(WillmoreGradient, MatchesFiniteDifferencesOnCylinder) {
  CylinderGrid g(-2, 2, 321, 16);
  EXPECT_LE(max_fd_mismatch(cylinder(g).with_numeric_jets(), 20, 11), 1e-4);
}

TEST(WillmoreGradient, MatchesFiniteDifferencesOnHarmonicGraph) {
  CylinderGrid g(-2, 2, 321, 16);
  EXPECT_LE(max_fd_mismatch(harmonic_graph(g, 0.1, 1).with_numeric_jets(), 20, 12), 1e-4);
}

// The general-gauge formula does not need a conformal base point.
TEST(WillmoreGradient, MatchesFiniteDifferencesOffConformalGauge) {
  CylinderGrid g(-2, 2, 641, 16);
  auto base = perturb(cylinder(g), 0.05, PerturbMode{2, 0.3, 0.0, 1.2});
  ASSERT_GT(fundamental_forms(base).max_defect(), 1e-3);
  EXPECT_LE(max_fd_mismatch(base, 20, 13), 1e-4);
}

TEST(SynthesizeNeck, CatenoidSeedTerminatesImmediately) {
  CylinderGrid g(-2, 2, 81, 16);
  // Iterates carry grid-operator jets; on this grid the catenoid's gradient
  // norm with such jets sits near 2e-5.
  DescentOptions opt;
  opt.grad_tol = 1e-4;
  auto st = synthesize_neck(catenoid(g), opt);
  EXPECT_EQ(st.status, DescentStatus::converged);
  EXPECT_EQ(st.iteration, 0);
  EXPECT_EQ(st.trace.size(), 1u);
}

TEST(SynthesizeNeck, PerturbedCatenoidDescends) {
  CylinderGrid g(-2, 2, 81, 16);
  auto seed = perturb(catenoid(g), 0.01, PerturbMode{1, 0.0, 0.0, 1.0});
  DescentOptions opt;
  opt.max_iter = 500;
  auto st = synthesize_neck(seed, opt);
  ASSERT_NE(st.status, DescentStatus::stalled) << st.message;
  ASSERT_NE(st.status, DescentStatus::immersion_lost) << st.message;
  ASSERT_GE(st.trace.size(), 2u);
  for (std::size_t k = 1; k < st.trace.size(); ++k) {
    const TraceRow& prev = st.trace[k - 1];
    const TraceRow& row = st.trace[k];
    EXPECT_LT(row.W, prev.W) << "iteration " << row.iteration;
    EXPECT_LE(row.W, prev.W - opt.armijo * row.step * prev.grad_norm * prev.grad_norm) << "iteration " << row.iteration;
  }
  EXPECT_LE(st.grad_norm, 0.1 * st.trace.front().grad_norm);
  EXPECT_LE(st.iteration, 500);
}

TEST(SynthesizeNeck, ClampedRowsAreBitwiseUnchanged) {
  CylinderGrid g(-2, 2, 41, 16);
  auto seed = perturb(catenoid(g), 0.01, PerturbMode{1, 0.0, 0.0, 1.0});
  DescentOptions opt;
  opt.max_iter = 30;
  auto st = synthesize_neck(seed, opt);
  ASSERT_GT(st.iteration, 0);
  for (int i : {0, 1, g.n_t() - 2, g.n_t() - 1})
    for (int j = 0; j < g.n_theta(); ++j)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(st.imm.f()(i, j, c), seed.f()(i, j, c));
}

TEST(SynthesizeNeck, GaugeDriftHalts) {
  CylinderGrid g(-2, 2, 41, 16);
  auto seed = perturb(catenoid(g), 0.01, PerturbMode{1, 0.0, 0.0, 1.0});
  DescentOptions opt;
  opt.drift_tol = 1e-5;
  auto st = synthesize_neck(seed, opt);
  EXPECT_EQ(st.status, DescentStatus::gauge_drift);
  EXPECT_LT(st.iteration, opt.max_iter);
}

TEST(SynthesizeNeck, BrokenImmersionReturnsLastValidState) {
  CylinderGrid g(-2, 2, 81, 16);
  auto seed = perturb(catenoid(g), 0.01, PerturbMode{1, 0.0, 0.0, 1.0});
  DescentOptions opt;
  opt.initial_step_factor = 1e6;
  opt.max_halvings = 1;
  auto st = synthesize_neck(seed, opt);
  EXPECT_EQ(st.status, DescentStatus::immersion_lost);
  EXPECT_EQ(st.iteration, 0);
  EXPECT_EQ(st.W, st.trace.front().W);
  EXPECT_NO_THROW(fundamental_forms(st.imm));
}

TEST(SynthesizeNeck, TraceCsv) {
  CylinderGrid g(-2, 2, 41, 16);
  DescentOptions opt;
  opt.max_iter = 3;
  opt.grad_tol = 0.0;
  auto st = synthesize_neck(perturb(catenoid(g), 0.01, PerturbMode{1, 0.0, 0.0, 1.0}), opt);
  std::ostringstream os;
  write_trace_csv(st.trace, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "iteration,W,gradnorm,step,defect");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(st.trace.size()));
}

TEST(SynthesizeNeck, RejectsBadOptions) {
  CylinderGrid g(-2, 2, 41, 16);
  DescentOptions opt;
  opt.armijo = 1.5;
  EXPECT_THROW(synthesize_neck(catenoid(g), opt), ParameterError);
}
