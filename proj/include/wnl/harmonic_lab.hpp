#pragma once

// Harmonic functions on the cylinder and their weighted three-circle behaviour.
//
//   u = a + b t + sum_k (a_k e^{-kt} + b_k e^{kt}) cos k theta + (a'_k e^{-kt} + b'_k e^{kt}) sin k theta
//
// Segment energies Phi_i = int_{Q_i} |u|^2 e^{-2mt} over Q_i = [(i-1)L, iL] x S^1
// split into the linear part A_i and per-mode parts B_{i;k}, B'_{i;k}. For
// large L the raw values under- or overflow, so inequality verdicts are
// evaluated from exponent-tagged terms instead of the plain doubles.

#include <wnl/cylgrid.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wnl {

struct HarmonicExpansion {
  int m = 1; // weight exponent in e^{-2mt}
  int K = 0; // highest mode
  double a = 0.0;
  double b = 0.0;
  // Indexed by mode k = 0..K; entry 0 is unused.
  std::vector<double> ak, bk, apk, bpk;
  double fit_residual = 0.0;  // RMS misfit of the per-mode two-column fits
  double remainder_rms = 0.0; // largest circle content outside modes 0..K

  HarmonicExpansion() = default;
  HarmonicExpansion(int m_, int K_) : m(m_), K(K_), ak(K_ + 1, 0.0), bk(K_ + 1, 0.0), apk(K_ + 1, 0.0), bpk(K_ + 1, 0.0) {
    if (m_ < 1) throw ParameterError("harmonic expansion weight m must be positive");
    if (K_ < m_) throw ParameterError("harmonic expansion needs K >= m");
  }

  double operator()(double t, double theta) const {
    double s = a + b * t;
    for (int k = 1; k <= K; ++k) {
      const double em = std::exp(-k * t), ep = std::exp(k * t);
      s += (ak[k] * em + bk[k] * ep) * std::cos(k * theta) + (apk[k] * em + bpk[k] * ep) * std::sin(k * theta);
    }
    return s;
  }

  bool is_zero() const {
    if (a != 0.0 || b != 0.0) return false;
    for (int k = 1; k <= K; ++k)
      if (ak[k] != 0.0 || bk[k] != 0.0 || apk[k] != 0.0 || bpk[k] != 0.0) return false;
    return true;
  }
};

namespace detail {

// Least squares for d ~ alpha x + beta y. Returns false when the columns are
// numerically parallel.
inline bool two_column_fit(std::span<const double> x, std::span<const double> y, std::span<const double> d, double& alpha,
                           double& beta, double& rss) {
  double nx = 0.0, ny = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    nx += x[s] * x[s];
    ny += y[s] * y[s];
  }
  nx = std::sqrt(nx);
  ny = std::sqrt(ny);
  if (!(nx > 0.0) || !(ny > 0.0)) return false;
  double rho = 0.0, ud = 0.0, vd = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    rho += (x[s] / nx) * (y[s] / ny);
    ud += (x[s] / nx) * d[s];
    vd += (y[s] / ny) * d[s];
  }
  const double w2 = 1.0 - rho * rho;
  if (!(w2 > 1e-20)) return false;
  const double bn = (vd - rho * ud) / w2;
  const double an = ud - rho * bn;
  alpha = an / nx;
  beta = bn / ny;
  rss = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    const double r = d[s] - alpha * x[s] - beta * y[s];
    rss += r * r;
  }
  return true;
}

} // namespace detail

// Fit the expansion to samples of a harmonic function. Stations default to
// every grid station; at least four are required.
inline HarmonicExpansion expand(const GridField& samples, int m, int K, std::vector<int> stations = {}) {
  const CylinderGrid& g = samples.grid();
  if (samples.components() != 1) throw ParameterError("expand needs a scalar field");
  if (stations.empty())
    for (int i = 0; i < g.n_t(); ++i) stations.push_back(i);
  if (stations.size() < 4) throw ParameterError("expand needs at least four t-stations");
  HarmonicExpansion e(m, K);
  const std::size_t S = stations.size();
  std::vector<FourierModes> modes;
  modes.reserve(S);
  for (int i : stations) {
    modes.push_back(fourier_modes(samples, i, K));
    e.remainder_rms = std::max(e.remainder_rms, modes.back().remainder_rms);
  }
  std::vector<double> x(S), y(S), d(S);
  double rss_total = 0.0;
  std::size_t count = 0;
  auto fit = [&](double& alpha, double& beta, const char* what, int k) {
    double rss = 0.0;
    if (!detail::two_column_fit(x, y, d, alpha, beta, rss))
      throw ConditioningError(std::string("expand: design for ") + what + " mode " + std::to_string(k) +
                              " is singular; stations are too close together");
    rss_total += rss;
    count += S;
  };
  for (std::size_t s = 0; s < S; ++s) {
    x[s] = 1.0;
    y[s] = g.t(stations[s]);
    d[s] = modes[s].cos_coeff[0];
  }
  fit(e.a, e.b, "constant", 0);
  for (int k = 1; k <= K; ++k) {
    for (std::size_t s = 0; s < S; ++s) {
      x[s] = std::exp(-k * g.t(stations[s]));
      y[s] = std::exp(k * g.t(stations[s]));
      d[s] = modes[s].cos_coeff[k];
    }
    fit(e.ak[k], e.bk[k], "cosine", k);
    for (std::size_t s = 0; s < S; ++s) d[s] = modes[s].sin_coeff[k];
    fit(e.apk[k], e.bpk[k], "sine", k);
  }
  e.fit_residual = std::sqrt(rss_total / static_cast<double>(count));
  return e;
}

struct ThreeCircleProfile {
  double L = 0.0;
  int m = 1;
  std::array<double, 3> A{}, B{}, Bp{}, Phi{};
  // Per-mode values, indexed [k][i - 1]; k = 0 unused.
  std::vector<std::array<double, 3>> Bk, Bpk;
  std::vector<double> C, D, E, Cp, Dp, Ep;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

namespace detail {

// A value held as sum_j coef_j * exp(expo_j).
struct ExpTerm {
  double coef;
  double expo;
};

inline double primitive_poly(double c1, double c2, double c3, double t) { return c1 + c2 * t + c3 * t * t; }

// Exponent-tagged terms of Phi_i (i = 1, 2, 3).
inline std::vector<ExpTerm> segment_terms(const HarmonicExpansion& e, double L, int i) {
  constexpr double pi = std::numbers::pi;
  const int m = e.m;
  const double s = (i - 1) * L;
  std::vector<ExpTerm> out;
  const double c1 = e.a * e.a + e.a * e.b / m + e.b * e.b / (2.0 * m * m);
  const double c2 = 2.0 * e.a * e.b + e.b * e.b / m;
  const double c3 = e.b * e.b;
  // A_i = 2 pi (F(s) - F(s + L)), F(t) = e^{-2mt} P(t) / (2m)
  out.push_back({pi / m * (primitive_poly(c1, c2, c3, s) - std::exp(-2.0 * m * L) * primitive_poly(c1, c2, c3, s + L)),
                 -2.0 * m * s});
  auto mode = [&](int k, double ak, double bk) {
    out.push_back({0.5 * pi * ak * ak * -std::expm1(-2.0 * (k + m) * L) / (k + m), -2.0 * (k + m) * s});
    if (k == m) out.push_back({pi * bk * bk * L, 0.0});
    else if (k > m)
      out.push_back({0.5 * pi * bk * bk * -std::expm1(-2.0 * (k - m) * L) / (k - m), 2.0 * (k - m) * (s + L)});
    else
      out.push_back({0.5 * pi * bk * bk * -std::expm1(-2.0 * (m - k) * L) / (m - k), -2.0 * (m - k) * s});
    out.push_back({0.5 * pi * (2.0 * ak * bk / m) * -std::expm1(-2.0 * m * L), -2.0 * m * s});
  };
  for (int k = 1; k <= e.K; ++k) {
    mode(k, e.ak[k], e.bk[k]);
    mode(k, e.apk[k], e.bpk[k]);
  }
  return out;
}

} // namespace detail

inline ThreeCircleProfile weighted_threecircle_closed_form(const HarmonicExpansion& e, double L) {
  constexpr double pi = std::numbers::pi;
  if (!(L > 0.0)) throw ParameterError("segment length L must be positive");
  const int m = e.m;
  ThreeCircleProfile p;
  p.L = L;
  p.m = m;
  p.c1 = e.a * e.a + e.a * e.b / m + e.b * e.b / (2.0 * m * m);
  p.c2 = 2.0 * e.a * e.b + e.b * e.b / m;
  p.c3 = e.b * e.b;
  auto F = [&](double t) { return std::exp(-2.0 * m * t) / (2.0 * m) * detail::primitive_poly(p.c1, p.c2, p.c3, t); };
  for (int i = 1; i <= 3; ++i) p.A[i - 1] = 2.0 * pi * (F((i - 1) * L) - F(i * L));

  p.Bk.assign(e.K + 1, {});
  p.Bpk.assign(e.K + 1, {});
  for (auto* v : {&p.C, &p.D, &p.E, &p.Cp, &p.Dp, &p.Ep}) v->assign(e.K + 1, 0.0);
  auto constants = [&](int k, double ak, double bk, double& C, double& D, double& E) {
    C = 0.5 * pi * ak * ak * -std::expm1(-2.0 * (k + m) * L) / (k + m);
    D = k == m ? pi * bk * bk * L : 0.5 * pi * bk * bk * std::expm1(2.0 * (k - m) * L) / (k - m);
    E = 0.5 * pi * (2.0 * ak * bk / m) * -std::expm1(-2.0 * m * L);
  };
  auto segment = [&](int k, double C, double D, double E, int i) {
    const double s = (i - 1) * L;
    return C * std::exp(-2.0 * (k + m) * s) + D * std::exp(2.0 * (k - m) * s) + E * std::exp(-2.0 * m * s);
  };
  for (int k = 1; k <= e.K; ++k) {
    constants(k, e.ak[k], e.bk[k], p.C[k], p.D[k], p.E[k]);
    constants(k, e.apk[k], e.bpk[k], p.Cp[k], p.Dp[k], p.Ep[k]);
    for (int i = 1; i <= 3; ++i) {
      p.Bk[k][i - 1] = segment(k, p.C[k], p.D[k], p.E[k], i);
      p.Bpk[k][i - 1] = segment(k, p.Cp[k], p.Dp[k], p.Ep[k], i);
      p.B[i - 1] += p.Bk[k][i - 1];
      p.Bp[i - 1] += p.Bpk[k][i - 1];
    }
  }
  for (int i = 0; i < 3; ++i) p.Phi[i] = p.A[i] + p.B[i] + p.Bp[i];
  return p;
}

// The same three segment values by quadrature of the reconstructed function
// on a grid over [0, 3L].
inline std::array<double, 3> weighted_threecircle_quadrature(const HarmonicExpansion& e, double L, int per_segment = 400) {
  const int nth = std::max(16, 2 * (2 * e.K + 2));
  CylinderGrid g(0.0, 3.0 * L, 3 * per_segment + 1, nth);
  const int m = e.m;
  GridField dens = GridField::sample_scalar(g, [&](double t, double th) {
    const double u = e(t, th);
    return u * u * std::exp(-2.0 * m * t);
  });
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) out[i] = band_integral(dens, i * per_segment, (i + 1) * per_segment);
  return out;
}

struct HarmonicVerdict {
  bool holds = false;
  bool vacuous = false;   // u = 0: both sides vanish
  double lhs = 0.0;       // Phi_2
  double rhs = 0.0;       // e^{-qL} (Phi_1 + Phi_3)
  double margin = 0.0;    // rhs - lhs (may underflow for large L)
  double relative_margin = 0.0; // (rhs - lhs) / rhs, computed without underflow
};

// Phi_2 < e^{-qL} (Phi_1 + Phi_3).
inline HarmonicVerdict check_harmonic_three_circle(const HarmonicExpansion& e, double L, double q) {
  if (!(q > 0.0 && q < 2.0)) throw ParameterError("q must lie in (0, 2)");
  if (!(L > 0.0)) throw ParameterError("segment length L must be positive");
  HarmonicVerdict v;
  if (e.is_zero()) {
    v.holds = true;
    v.vacuous = true;
    return v;
  }
  auto t1 = detail::segment_terms(e, L, 1), t2 = detail::segment_terms(e, L, 2), t3 = detail::segment_terms(e, L, 3);
  double M = -std::numeric_limits<double>::infinity();
  auto scan = [&](const std::vector<detail::ExpTerm>& ts, double shift) {
    for (const auto& t : ts)
      if (t.coef != 0.0) M = std::max(M, t.expo + shift);
  };
  scan(t2, 0.0);
  scan(t1, -q * L);
  scan(t3, -q * L);
  auto sum = [&](const std::vector<detail::ExpTerm>& ts, double shift) {
    double s = 0.0;
    for (const auto& t : ts)
      if (t.coef != 0.0) s += t.coef * std::exp(t.expo + shift - M);
    return s;
  };
  const double l = sum(t2, 0.0);
  const double r = sum(t1, -q * L) + sum(t3, -q * L);
  const double scale = std::exp(M);
  v.lhs = l * scale;
  v.rhs = r * scale;
  v.margin = (r - l) * scale;
  v.relative_margin = r > 0.0 ? (r - l) / r : -std::numeric_limits<double>::infinity();
  v.holds = l < r;
  return v;
}

// Largest root L0 of cosh(2kL) + 1 = e^{qL}; for L > L0 the inequality
// (a+b)^2 <= e^{-qL} ((a e^{kL} + b e^{-kL})^2 + (a e^{-kL} + b e^{kL})^2) holds
// for every (a, b). Returns 0 when there is no positive root.
inline double two_mode_threshold(double q, int k = 1) {
  if (!(q > 0.0)) throw ParameterError("q must be positive");
  if (q >= 2.0) throw ParameterError("q >= 2 has no finite two-mode threshold");
  if (k < 1) throw ParameterError("mode k must be at least 1");
  auto phi = [&](double L) { return std::cosh(2.0 * k * L) + 1.0 - std::exp(q * L); };
  // Beyond this point e^{2kL}/2 > e^{qL}, so phi > 0.
  const double upper = std::log(2.0) / (2.0 * k - q) + 1.0;
  const int steps = 20000;
  double last_neg_lo = -1.0;
  for (int s = 1; s <= steps; ++s) {
    const double L = upper * s / steps;
    if (phi(L) < 0.0) last_neg_lo = L;
  }
  if (last_neg_lo < 0.0) return 0.0;
  double lo = last_neg_lo, hi = std::min(upper, last_neg_lo + upper / steps);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Right side minus left side of the two-mode inequality for one (a, b).
inline double two_mode_margin(double a, double b, double L, double q, int k = 1) {
  const double ep = std::exp(k * L), em = std::exp(-k * L);
  const double x = a * ep + b * em, y = a * em + b * ep;
  return std::exp(-q * L) * (x * x + y * y) - (a + b) * (a + b);
}

// Coefficients uniform in [-1, 1] damped by 2^{-k} on mode k; b_m = b'_m = 0.
// Each coefficient survives with probability `keep`.
template <typename Rng>
HarmonicExpansion random_expansion(int m, int K, Rng& rng, bool zero_growing_m_mode = true, double keep = 1.0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::bernoulli_distribution alive(keep);
  auto draw = [&](double damp) {
    const double v = damp * U(rng);
    return alive(rng) ? v : 0.0;
  };
  HarmonicExpansion e(m, K);
  e.a = draw(1.0);
  e.b = draw(1.0);
  for (int k = 1; k <= K; ++k) {
    const double damp = std::ldexp(1.0, -k);
    e.ak[k] = draw(damp);
    e.bk[k] = draw(damp);
    e.apk[k] = draw(damp);
    e.bpk[k] = draw(damp);
  }
  if (zero_growing_m_mode) {
    e.bk[m] = 0.0;
    e.bpk[m] = 0.0;
  }
  return e;
}

struct EmpiricalL0 {
  double L0 = 0.0;
  bool found = false;                 // false when some trial still fails at L_max
  int trials = 0;
  double worst_relative_margin = 0.0; // smallest relative margin over trials at L0
  HarmonicExpansion witness;          // the trial attaining it
};

// Draws the trial pool used by the L0 search: K uniform in [m, K_max] per
// trial and each coefficient kept with probability 1/2. When every growing
// mode is present the third segment dominates and the inequality is never
// tight, so sparse draws are what probe the threshold.
inline std::vector<HarmonicExpansion> harmonic_trial_pool(int m, int trials, unsigned seed, int K_max = 8) {
  if (K_max < m) throw ParameterError("K_max must be at least m");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pickK(m, K_max);
  std::vector<HarmonicExpansion> pool;
  pool.reserve(trials);
  for (int t = 0; t < trials; ++t) pool.push_back(random_expansion(m, pickK(rng), rng, true, 0.5));
  return pool;
}

// Smallest L on a `resolution` lattice past the last L at which some trial
// violates the weighted three-circle inequality. An upper point where every
// trial holds is found by doubling from L = 1; below min(upper, dense_until)
// the lattice is scanned exhaustively, above it the boundary is bisected.
inline EmpiricalL0 empirical_L0_search(int m, double q, int trials, unsigned seed, int K_max = 8, double resolution = 0.05,
                                       double dense_until = 20.0, double L_max = 1e5) {
  if (trials < 100) throw ParameterError("empirical L0 search needs at least 100 trials");
  if (!(q > 0.0 && q < 2.0)) throw ParameterError("q must lie in (0, 2)");
  const std::vector<HarmonicExpansion> pool = harmonic_trial_pool(m, trials, seed, K_max);
  auto all_hold = [&](double L) {
    for (const auto& e : pool)
      if (!check_harmonic_three_circle(e, L, q).holds) return false;
    return true;
  };

  EmpiricalL0 out;
  out.trials = trials;
  double fail_lo = 0.0, upper = 1.0;
  while (!all_hold(upper)) {
    fail_lo = upper;
    upper *= 2.0;
    if (upper > L_max) {
      out.L0 = std::numeric_limits<double>::infinity();
      return out;
    }
  }
  double L0;
  if (upper <= dense_until) {
    const int steps = static_cast<int>(std::floor(upper / resolution + 0.5));
    int last_fail = 0;
    for (int s = 1; s <= steps; ++s)
      if (!all_hold(s * resolution)) last_fail = s;
    L0 = (last_fail + 1) * resolution;
  } else {
    double lo = fail_lo, hi = upper;
    while (hi - lo > resolution) {
      const double mid = 0.5 * (lo + hi);
      (all_hold(mid) ? hi : lo) = mid;
    }
    L0 = std::ceil(hi / resolution) * resolution;
  }
  out.found = true;
  out.L0 = L0;
  out.worst_relative_margin = std::numeric_limits<double>::infinity();
  for (const auto& e : pool) {
    const HarmonicVerdict v = check_harmonic_three_circle(e, L0, q);
    const double r = v.relative_margin;
    if (!v.vacuous && r < out.worst_relative_margin) {
      out.worst_relative_margin = r;
      out.witness = e;
    }
  }
  return out;
}

} // namespace wnl
